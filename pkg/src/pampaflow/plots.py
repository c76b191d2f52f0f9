"""Report figures rendered to files alongside the delimited outputs."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .risk import RiskReport

UNSAFE_COLOR = "#e07b00"
SAFE_COLOR = "#4878a8"


def render_risk_chart(reports: list[RiskReport], threshold: float, path) -> None:
    """Bar chart of per-region danger on a log scale, unsafe regions in orange.

    Bars follow the report order (max_ffa descending); a dashed line marks
    the safe/unsafe threshold.
    """
    names = [rep.name for rep in reports]
    levels = [rep.log10_max_ffa for rep in reports]
    colors = [UNSAFE_COLOR if rep.unsafe else SAFE_COLOR for rep in reports]

    width = max(4.0, 0.6 * len(reports) + 1.5)
    fig, ax = plt.subplots(figsize=(width, 3.2))
    ax.bar(range(len(reports)), levels, color=colors)
    ax.axhline(math.log10(threshold), color="black", linestyle="--",
               linewidth=0.8, label=f"danger threshold ({threshold:g})")
    ax.set_xticks(range(len(reports)))
    ax.set_xticklabels(names, rotation=45, ha="right")
    ax.set_ylabel("log10 max flooding flow accumulation")
    ax.legend(loc="upper right", fontsize=8)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": "pampaflow"})
    plt.close(fig)
