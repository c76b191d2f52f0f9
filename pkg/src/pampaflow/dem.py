"""DEM construction from LiDAR-style point clouds.

Three steps: grid the points at fine resolution keeping the minimum
elevation per cell, aggregate by block minimum to the working resolution,
and close remaining holes by scanline interpolation (row first, column
fallback, nearest-valid copy last).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridFormatError, ToolkitError
from .raster import DEFAULT_NODATA, GeoTransform, Grid


@dataclass(frozen=True)
class BoundingBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("bounding box must be non-degenerate")


@dataclass
class PointCloud:
    """Sequence of (x, y, z) survey points in planar meters."""

    points: np.ndarray

    def __init__(self, points):
        arr = np.asarray(points, dtype=np.float64)
        if arr.size == 0:
            arr = arr.reshape(0, 3)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ValueError("point cloud must be an (N, 3) array of x y z")
        if arr.size and not np.isfinite(arr).all():
            raise ValueError("point coordinates must be finite")
        self.points = arr

    def __len__(self) -> int:
        return self.points.shape[0]

    def bounds(self) -> BoundingBox:
        if len(self) == 0:
            raise ValueError("empty point cloud has no bounds")
        xs, ys = self.points[:, 0], self.points[:, 1]
        return BoundingBox(float(xs.min()), float(ys.min()),
                           float(xs.max()), float(ys.max()))


@dataclass(frozen=True)
class DemBuildConfig:
    """Gridding parameters; defaults follow the fine 0.10 m -> 0.40 m workflow."""

    extent: BoundingBox
    fine_resolution: float = 0.10
    aggregate_factor: int = 4
    nodata: float = DEFAULT_NODATA

    def __post_init__(self):
        if not (self.fine_resolution > 0):
            raise ValueError("fine_resolution must be > 0")
        if self.aggregate_factor < 1:
            raise ValueError("aggregate_factor must be >= 1")


def read_xyz(path) -> PointCloud:
    """Read a plain-text point file: one `x y z` triple per line, `#` comments."""
    rows: list[tuple[float, float, float]] = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.strip()
            if not body or body.startswith("#"):
                continue
            parts = body.split()
            if len(parts) != 3:
                raise GridFormatError(f"{path}:{lineno}: expected 'x y z', got {body!r}")
            try:
                rows.append((float(parts[0]), float(parts[1]), float(parts[2])))
            except ValueError:
                raise GridFormatError(f"{path}:{lineno}: non-numeric coordinate") from None
    return PointCloud(np.array(rows, dtype=np.float64).reshape(len(rows), 3))


def write_xyz(cloud: PointCloud, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("# x y z\n")
        for x, y, z in cloud.points:
            fh.write(f"{np.format_float_positional(x, trim='-')} "
                     f"{np.format_float_positional(y, trim='-')} "
                     f"{np.format_float_positional(z, trim='-')}\n")


def rasterize_points(cloud: PointCloud, config: DemBuildConfig) -> Grid:
    """Grid points at the fine resolution; each cell keeps the minimum z.

    Cell membership uses half-open intervals [west, east) x [south, north);
    points outside the gridded extent are dropped.  Empty cells are nodata.
    """
    ext = config.extent
    res = config.fine_resolution
    ncols = int(math.ceil((ext.x_max - ext.x_min) / res - 1e-9))
    nrows = int(math.ceil((ext.y_max - ext.y_min) / res - 1e-9))
    if ncols < 1 or nrows < 1:
        raise ValueError("extent is smaller than one cell")

    acc = np.full((nrows, ncols), np.inf, dtype=np.float64)
    if len(cloud):
        x, y, z = cloud.points[:, 0], cloud.points[:, 1], cloud.points[:, 2]
        col = np.floor((x - ext.x_min) / res).astype(np.int64)
        row_s = np.floor((y - ext.y_min) / res).astype(np.int64)
        keep = (col >= 0) & (col < ncols) & (row_s >= 0) & (row_s < nrows)
        row = nrows - 1 - row_s[keep]
        np.minimum.at(acc, (row, col[keep]), z[keep])

    values = np.where(np.isinf(acc), config.nodata, acc)
    return Grid(ncols, nrows, GeoTransform(ext.x_min, ext.y_min, res),
                values, config.nodata)


def aggregate_min(grid: Grid, factor: int) -> Grid:
    """Block-minimum aggregation; nodata is ignored inside each block.

    Output dimensions are ceil(input/factor); trailing blocks that do not
    span a full factor x factor window aggregate over the cells that exist.
    """
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if factor == 1:
        return grid.new_like(grid.values)

    h, w = grid.height, grid.width
    out_h = (h + factor - 1) // factor
    out_w = (w + factor - 1) // factor

    work = np.where(grid.valid_mask, grid.values, np.inf)
    core_h = (h // factor) * factor
    core_w = (w // factor) * factor

    out = np.full((out_h, out_w), np.inf, dtype=np.float64)
    if core_h and core_w:
        blocks = work[:core_h, :core_w].reshape(h // factor, factor, w // factor, factor)
        out[:h // factor, :w // factor] = blocks.min(axis=(1, 3))
    # ragged strips on the south and east edges
    for br in range(out_h):
        r0, r1 = br * factor, min((br + 1) * factor, h)
        for bc in range(out_w):
            if br < h // factor and bc < w // factor:
                continue
            c0, c1 = bc * factor, min((bc + 1) * factor, w)
            out[br, bc] = work[r0:r1, c0:c1].min()

    values = np.where(np.isinf(out), grid.nodata, out)
    t = grid.transform
    # north-west corner is preserved; the covered footprint may extend past
    # the source on the south/east when dimensions are not divisible
    new_t = GeoTransform(t.origin_x,
                         t.origin_y + h * t.cell_size - out_h * (t.cell_size * factor),
                         t.cell_size * factor)
    return Grid(out_w, out_h, new_t, values, grid.nodata)


def fill_nodata_linear(grid: Grid) -> Grid:
    """Fill nodata cells deterministically.

    Order of preference per cell: linear interpolation between the nearest
    valid cells west and east in the same row; failing that, the same along
    the column; failing both, copy of the nearest valid cell by Euclidean
    distance (ties to the smaller row, then smaller column).  Valid cells
    are never altered, so the operation is idempotent.
    """
    valid = grid.valid_mask
    if not valid.any():
        raise ToolkitError("cannot fill a grid that is entirely nodata")
    if valid.all():
        return grid.new_like(grid.values)

    src = grid.values
    out = src.copy()
    h, w = src.shape
    unresolved: list[tuple[int, int]] = []

    for r in range(h):
        cols = np.flatnonzero(valid[r])
        if cols.size == 0:
            unresolved.extend((r, c) for c in range(w))
            continue
        for c in np.flatnonzero(~valid[r]):
            left = cols[cols < c]
            right = cols[cols > c]
            if left.size and right.size:
                cl, cr = int(left[-1]), int(right[0])
                vl, vr = src[r, cl], src[r, cr]
                out[r, c] = vl + (vr - vl) * ((c - cl) / (cr - cl))
            else:
                unresolved.append((r, int(c)))

    still: list[tuple[int, int]] = []
    for r, c in unresolved:
        rows = np.flatnonzero(valid[:, c])
        above = rows[rows < r]
        below = rows[rows > r]
        if above.size and below.size:
            ra, rb = int(above[-1]), int(below[0])
            va, vb = src[ra, c], src[rb, c]
            out[r, c] = va + (vb - va) * ((r - ra) / (rb - ra))
        else:
            still.append((r, c))

    if still:
        vr, vc = np.nonzero(valid)
        for r, c in still:
            d2 = (vr - r) ** 2 + (vc - c) ** 2
            best = np.lexsort((vc, vr, d2))[0]
            out[r, c] = src[vr[best], vc[best]]

    return grid.new_like(out)


def build_dem(cloud: PointCloud, config: DemBuildConfig) -> Grid:
    """Full chain: rasterize at fine resolution, block-minimum, fill holes."""
    fine = rasterize_points(cloud, config)
    coarse = aggregate_min(fine, config.aggregate_factor)
    return fill_nodata_linear(coarse)
