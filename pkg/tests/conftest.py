"""Shared fixtures: deterministic random grids and tiny pipeline helpers."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pampaflow.raster import GeoTransform, Grid

NODATA = -9999.0


def random_dem(rng: np.random.Generator, height: int, width: int,
               hole_fraction: float = 0.12, cell_size: float = 1.0) -> Grid:
    """Random rough terrain with scattered nodata holes.

    Regenerates the hole pattern until every valid cell connects to the grid
    edge through valid cells, so depressions always have somewhere to drain.
    """
    values = rng.uniform(0.0, 10.0, size=(height, width))
    while True:
        holes = rng.random((height, width)) < hole_fraction
        valid = ~holes
        if valid.any() and _all_connected_to_edge(valid):
            break
    out = np.where(valid, values, NODATA)
    return Grid(width, height, GeoTransform(0.0, 0.0, cell_size), out, NODATA)


def _all_connected_to_edge(valid: np.ndarray) -> bool:
    h, w = valid.shape
    seen = np.zeros_like(valid)
    stack = [(r, c) for r in range(h) for c in range(w)
             if valid[r, c] and (r in (0, h - 1) or c in (0, w - 1))]
    for r, c in stack:
        seen[r, c] = True
    while stack:
        r, c = stack.pop()
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                nr, nc = r + dr, c + dc
                if 0 <= nr < h and 0 <= nc < w and valid[nr, nc] and not seen[nr, nc]:
                    seen[nr, nc] = True
                    stack.append((nr, nc))
    return bool((seen == valid).all())


def east_sloping_plane(height: int, width: int, drop: float = 1.0,
                       cell_size: float = 1.0) -> Grid:
    values = np.tile(np.arange(width, 0, -1, dtype=np.float64) * drop, (height, 1))
    return Grid(width, height, GeoTransform(0.0, 0.0, cell_size), values, NODATA)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
