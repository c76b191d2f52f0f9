"""Connect coarse-grid flow accumulation to a fine LiDAR grid.

Upstream catchments routed on a coarse DEM are injected into the fine grid
as accumulation seeds where the coarse stream network enters the fine
extent.  Seed amounts are rescaled by the cell-area ratio so they stay in
fine-cell-count units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ExtentMismatchError, GridFormatError
from .geometry import clip_segment_to_rect, point_in_rect
from .hydrology import StreamNetwork
from .raster import CellIndex, GeoTransform, Grid


@dataclass(frozen=True)
class InletSeed:
    """Accumulation injected at a boundary cell of the fine grid."""

    cell: CellIndex
    accumulation: float


def _boundary_ring(height: int, width: int):
    """Boundary-ring cells in row-major order."""
    for c in range(width):
        yield 0, c
    for r in range(1, height - 1):
        yield r, 0
        if width > 1:
            yield r, width - 1
    if height > 1:
        for c in range(width):
            yield height - 1, c


def derive_inlet_seeds(coarse_network: StreamNetwork,
                       coarse_transform: GeoTransform,
                       fine_grid: Grid,
                       min_accum: float) -> list[InletSeed]:
    """Seeds for every coarse link that enters the fine grid from outside.

    A link qualifies when its head accumulation is at least `min_accum` and
    its polyline crosses the fine-grid footprint from outside to inside; the
    seed lands on the boundary-ring cell nearest the entry point (ties to
    the smaller row, then column) carrying the head accumulation rescaled by
    (coarse_cell_size / fine_cell_size) squared.
    """
    rect = fine_grid.world_bounds()
    seeds: list[InletSeed] = []
    scale = (coarse_transform.cell_size / fine_grid.cell_size) ** 2

    if coarse_network.links:
        xs = [x for ln in coarse_network.links for x, _ in ln.world]
        ys = [y for ln in coarse_network.links for _, y in ln.world]
        if (max(xs) < rect[0] or min(xs) > rect[2]
                or max(ys) < rect[1] or min(ys) > rect[3]):
            raise ExtentMismatchError(
                "coarse network footprint does not overlap the fine grid extent")

    for link in coarse_network.links:
        if link.head_accumulation < min_accum:
            continue
        entry = _first_entry_point(link.world, rect)
        if entry is None:
            continue
        cell = _nearest_ring_cell(fine_grid, entry)
        seeds.append(InletSeed(cell, link.head_accumulation * scale))

    return seeds


def _first_entry_point(polyline: list[tuple[float, float]],
                       rect: tuple[float, float, float, float]
                       ) -> tuple[float, float] | None:
    """First point where the polyline crosses into the rectangle from outside."""
    if not polyline:
        return None
    if point_in_rect(*polyline[0], rect):
        return None
    for (ax, ay), (bx, by) in zip(polyline, polyline[1:]):
        if point_in_rect(ax, ay, rect):
            continue  # only outside->inside transitions count as entries
        clipped = clip_segment_to_rect(ax, ay, bx, by, rect)
        if clipped is None:
            continue
        t_enter, _ = clipped
        return ax + t_enter * (bx - ax), ay + t_enter * (by - ay)
    return None


def _nearest_ring_cell(grid: Grid, point: tuple[float, float]) -> CellIndex:
    px, py = point
    best: CellIndex | None = None
    best_d2 = np.inf
    for r, c in _boundary_ring(grid.height, grid.width):
        x, y = grid.cell_center(r, c)
        d2 = (x - px) ** 2 + (y - py) ** 2
        if d2 < best_d2:
            best_d2 = d2
            best = CellIndex(r, c)
    assert best is not None
    return best


def write_seeds(seeds: list[InletSeed], path) -> None:
    """One `row col accumulation` line per seed."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("# row col accumulation\n")
        for s in seeds:
            fh.write(f"{s.cell.row} {s.cell.col} "
                     f"{np.format_float_positional(s.accumulation, trim='-')}\n")


def read_seeds(path) -> list[InletSeed]:
    seeds: list[InletSeed] = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.strip()
            if not body or body.startswith("#"):
                continue
            parts = body.split()
            if len(parts) != 3:
                raise GridFormatError(f"{path}:{lineno}: expected 'row col accumulation'")
            try:
                seeds.append(InletSeed(CellIndex(int(parts[0]), int(parts[1])),
                                       float(parts[2])))
            except ValueError:
                raise GridFormatError(f"{path}:{lineno}: non-numeric seed record") from None
    return seeds
