"""Georeferenced raster container with bit-exact ASCII I/O and false-color rendering.

The Grid is the universal currency of the toolkit: elevation, flow
accumulation, watershed labels, and water depth all travel as grids.
Coordinates are planar meters in a single unspecified CRS.  Row 0 is the
northernmost row; the transform origin is the lower-left corner of the
raster, matching the ASCII-grid convention.

Serialization uses shortest round-trip decimal representation so that
write-then-read reproduces every value bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridFormatError

DEFAULT_NODATA = -9999.0

_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "NODATA_value")


def _fmt(value: float) -> str:
    """Shortest decimal string that parses back to exactly `value`."""
    return np.format_float_positional(np.float64(value), trim="-")


@dataclass(frozen=True)
class GeoTransform:
    """Grid-to-world mapping: lower-left corner origin and square cell size."""

    origin_x: float
    origin_y: float
    cell_size: float

    def __post_init__(self):
        if not (math.isfinite(self.origin_x) and math.isfinite(self.origin_y)):
            raise ValueError("transform origin must be finite")
        if not (math.isfinite(self.cell_size) and self.cell_size > 0):
            raise ValueError("cell_size must be a positive finite number")


class CellIndex(tuple):
    """(row, col) address into a grid; row 0 is the northernmost row."""

    __slots__ = ()

    def __new__(cls, row: int, col: int):
        return super().__new__(cls, (int(row), int(col)))

    @property
    def row(self) -> int:
        return self[0]

    @property
    def col(self) -> int:
        return self[1]

    def __repr__(self):
        return f"CellIndex(row={self[0]}, col={self[1]})"


class Grid:
    """2D raster of float64 values with a nodata sentinel.

    `values` has shape (height, width).  The nodata sentinel is compared
    exactly; by construction it never collides with a valid value.
    """

    __slots__ = ("width", "height", "transform", "values", "nodata")

    def __init__(self, width: int, height: int, transform: GeoTransform,
                 values: np.ndarray, nodata: float = DEFAULT_NODATA):
        if width < 1 or height < 1:
            raise ValueError("grid dimensions must be >= 1")
        arr = np.asarray(values, dtype=np.float64)
        if arr.size != width * height:
            raise ValueError(f"values length {arr.size} != width*height {width * height}")
        self.width = int(width)
        self.height = int(height)
        self.transform = transform
        self.values = arr.reshape(height, width)
        self.nodata = float(nodata)

    @classmethod
    def full(cls, width: int, height: int, transform: GeoTransform,
             fill: float, nodata: float = DEFAULT_NODATA) -> "Grid":
        return cls(width, height, transform,
                   np.full((height, width), fill, dtype=np.float64), nodata)

    def new_like(self, values: np.ndarray) -> "Grid":
        """Fresh grid sharing geometry and nodata with this one."""
        return Grid(self.width, self.height, self.transform,
                    np.asarray(values, dtype=np.float64).copy(), self.nodata)

    @property
    def cell_size(self) -> float:
        return self.transform.cell_size

    @property
    def valid_mask(self) -> np.ndarray:
        return self.values != self.nodata

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        """World coordinates of the center of cell (row, col)."""
        t = self.transform
        x = t.origin_x + (col + 0.5) * t.cell_size
        y = t.origin_y + (self.height - row - 0.5) * t.cell_size
        return x, y

    def world_bounds(self) -> tuple[float, float, float, float]:
        """(x_min, y_min, x_max, y_max) of the full raster footprint."""
        t = self.transform
        return (t.origin_x, t.origin_y,
                t.origin_x + self.width * t.cell_size,
                t.origin_y + self.height * t.cell_size)

    def cell_at(self, x: float, y: float) -> CellIndex | None:
        """Cell containing world point (x, y), or None if outside the raster."""
        t = self.transform
        col = int(math.floor((x - t.origin_x) / t.cell_size))
        row_s = int(math.floor((y - t.origin_y) / t.cell_size))
        row = self.height - 1 - row_s
        if 0 <= row < self.height and 0 <= col < self.width:
            return CellIndex(row, col)
        return None

    def equals(self, other: "Grid") -> bool:
        return (self.width == other.width and self.height == other.height
                and self.transform == other.transform
                and self.nodata == other.nodata
                and np.array_equal(self.values, other.values))


def read_ascii_grid(path) -> Grid:
    """Parse an ASCII-grid file.

    Header lines must appear in exactly this order: ncols, nrows, xllcorner,
    yllcorner, cellsize, NODATA_value.  The body must contain exactly
    ncols*nrows whitespace-separated numeric tokens, northernmost row first.
    """
    with open(path, "r", encoding="ascii") as fh:
        text = fh.read()
    lines = text.splitlines()
    if len(lines) < len(_HEADER_KEYS):
        raise GridFormatError(f"{path}: malformed header (file too short)")

    header: dict[str, str] = {}
    for lineno, key in enumerate(_HEADER_KEYS):
        parts = lines[lineno].split()
        if len(parts) != 2 or parts[0] != key:
            raise GridFormatError(
                f"{path}: malformed header line {lineno + 1}: expected '{key} <value>'")
        header[key] = parts[1]

    try:
        ncols = int(header["ncols"])
        nrows = int(header["nrows"])
        xll = float(header["xllcorner"])
        yll = float(header["yllcorner"])
        cell = float(header["cellsize"])
        nodata = float(header["NODATA_value"])
    except ValueError as exc:
        raise GridFormatError(f"{path}: non-numeric header value: {exc}") from exc
    if ncols < 1 or nrows < 1:
        raise GridFormatError(f"{path}: malformed header: non-positive dimensions")
    if not (cell > 0):
        raise GridFormatError(f"{path}: malformed header: cellsize must be > 0")

    tokens = "\n".join(lines[len(_HEADER_KEYS):]).split()
    if len(tokens) != ncols * nrows:
        raise GridFormatError(
            f"{path}: token count mismatch: expected {ncols * nrows}, found {len(tokens)}")
    try:
        flat = np.array([float(tok) for tok in tokens], dtype=np.float64)
    except ValueError:
        bad = next(tok for tok in tokens if not _is_number(tok))
        raise GridFormatError(f"{path}: non-numeric token {bad!r}") from None

    return Grid(ncols, nrows, GeoTransform(xll, yll, cell), flat, nodata)


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def write_ascii_grid(grid: Grid, path) -> None:
    """Write `grid` so that read_ascii_grid reproduces it value for value."""
    t = grid.transform
    out = [
        f"ncols {grid.width}",
        f"nrows {grid.height}",
        f"xllcorner {_fmt(t.origin_x)}",
        f"yllcorner {_fmt(t.origin_y)}",
        f"cellsize {_fmt(t.cell_size)}",
        f"NODATA_value {_fmt(grid.nodata)}",
    ]
    for row in grid.values:
        out.append(" ".join(_fmt(v) for v in row))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(out) + "\n")


def render_falsecolor(grid: Grid, threshold: float, path) -> None:
    """Emit a binary PPM (P6) image of the grid.

    Cells below `threshold` map onto a red ramp from (80,0,0) at value 0 to
    (255,0,0) approaching the threshold.  Cells at or above the threshold map
    onto a ramp from (0,0,255) at the threshold to (255,255,255) at the grid
    maximum.  Nodata cells are black.
    """
    if not (threshold > 0):
        raise ValueError("threshold must be > 0")
    valid = grid.valid_mask
    v = grid.values
    h, w = v.shape

    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    below = valid & (v < threshold)
    above = valid & (v >= threshold)

    if below.any():
        frac = np.clip(v[below] / threshold, 0.0, 1.0)
        rgb[below, 0] = np.rint(80.0 + 175.0 * frac).astype(np.uint8)

    if above.any():
        vmax = float(v[valid].max())
        if vmax > threshold:
            frac = (v[above] - threshold) / (vmax - threshold)
        else:
            frac = np.zeros(int(above.sum()))
        white = np.rint(255.0 * np.clip(frac, 0.0, 1.0)).astype(np.uint8)
        rgb[above, 0] = white
        rgb[above, 1] = white
        rgb[above, 2] = 255

    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())
