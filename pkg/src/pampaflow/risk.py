"""Score geoglyph polygons against a flooding-flow-accumulation layer.

Each region is rasterized onto the layer (cell centers inside the polygon,
even-odd rule, boundary inclusive); the maximum value over those cells
decides the safe/unsafe verdict against a cell-count threshold.

The default threshold of 3257 cells ships with a helper that converts an
area in square meters to a cell count, because published sources quote both
a count and an equivalent area whose implied resolution differs from the
working grid; when scoring from an area, the report should record the count
actually used.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

from .errors import GridFormatError, RegionError
from .geometry import point_in_polygon
from .raster import CellIndex, Grid

DEFAULT_DANGER_THRESHOLD = 3257.0


@dataclass(frozen=True)
class GeoglyphRegion:
    """Named simple polygon (exterior ring only) in world meters."""

    id: str
    name: str
    polygon: tuple[tuple[float, float], ...]

    def __post_init__(self):
        ring = list(self.polygon)
        if len(ring) >= 2 and ring[0] == ring[-1]:
            ring = ring[:-1]
        if len(ring) < 3:
            raise ValueError("polygon needs at least 3 distinct vertices")


@dataclass(frozen=True)
class RiskReport:
    id: str
    name: str
    max_ffa: float
    log10_max_ffa: float
    unsafe: bool
    cells_evaluated: int


def threshold_from_area(area_m2: float, cell_size: float) -> float:
    """Convert a danger-area threshold in m^2 to a cell count on this grid."""
    if not (area_m2 > 0 and cell_size > 0):
        raise ValueError("area and cell size must be positive")
    return area_m2 / (cell_size * cell_size)


def rasterize_polygon(region: GeoglyphRegion, template: Grid) -> set[CellIndex]:
    """Cells of `template` whose centers fall inside the region polygon."""
    xs = [p[0] for p in region.polygon]
    ys = [p[1] for p in region.polygon]
    gx0, gy0, gx1, gy1 = template.world_bounds()
    t = template.transform
    cs = t.cell_size

    c_lo = max(0, int(math.floor((min(xs) - gx0) / cs)))
    c_hi = min(template.width - 1, int(math.floor((max(xs) - gx0) / cs)))
    rs_lo = max(0, int(math.floor((min(ys) - gy0) / cs)))
    rs_hi = min(template.height - 1, int(math.floor((max(ys) - gy0) / cs)))
    r_lo = template.height - 1 - rs_hi
    r_hi = template.height - 1 - rs_lo

    cells: set[CellIndex] = set()
    ring = list(region.polygon)
    for r in range(r_lo, r_hi + 1):
        for c in range(c_lo, c_hi + 1):
            x, y = template.cell_center(r, c)
            if point_in_polygon(x, y, ring):
                cells.add(CellIndex(r, c))
    if not cells:
        raise RegionError(f"region {region.id!r}: no overlapping cells")
    return cells


def score_geoglyphs(ffa: Grid, regions: list[GeoglyphRegion],
                    threshold: float = DEFAULT_DANGER_THRESHOLD) -> list[RiskReport]:
    """One report per region, sorted by max_ffa descending.

    unsafe is max_ffa >= threshold; nodata cells inside a region are ignored
    and a region with no valid cell at all is an error.
    """
    if not (threshold > 0):
        raise ValueError("threshold must be > 0")
    reports: list[RiskReport] = []
    for region in regions:
        cells = rasterize_polygon(region, ffa)
        values = [ffa.values[r, c] for r, c in cells
                  if ffa.values[r, c] != ffa.nodata]
        if not values:
            raise RegionError(f"region {region.id!r}: zero valid cells")
        max_ffa = float(max(values))
        log10 = math.log10(max_ffa) if max_ffa > 0 else float("-inf")
        reports.append(RiskReport(
            id=region.id,
            name=region.name,
            max_ffa=max_ffa,
            log10_max_ffa=log10,
            unsafe=bool(max_ffa >= threshold),
            cells_evaluated=len(values),
        ))
    reports.sort(key=lambda rep: (-rep.max_ffa, rep.id))
    return reports


def read_regions_geojson(path) -> list[GeoglyphRegion]:
    """GeoJSON FeatureCollection of Polygons with id and name properties.

    Only the exterior ring is accepted; polygons with holes are rejected.
    """
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("type") != "FeatureCollection":
        raise GridFormatError(f"{path}: expected a GeoJSON FeatureCollection")
    regions: list[GeoglyphRegion] = []
    for i, feature in enumerate(doc.get("features", [])):
        geom = feature.get("geometry") or {}
        if geom.get("type") != "Polygon":
            raise GridFormatError(f"{path}: feature {i} is not a Polygon")
        rings = geom.get("coordinates") or []
        if len(rings) != 1:
            raise GridFormatError(
                f"{path}: feature {i} has holes; only exterior rings are supported")
        props = feature.get("properties") or {}
        rid = str(props.get("id", feature.get("id", i)))
        name = str(props.get("name", rid))
        ring = tuple((float(x), float(y)) for x, y in rings[0])
        regions.append(GeoglyphRegion(rid, name, ring))
    return regions


def write_report_csv(reports: list[RiskReport], path) -> None:
    """`id,name,max_ffa,log10_max_ffa,unsafe,cells_evaluated`, sorted as given."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "name", "max_ffa", "log10_max_ffa",
                         "unsafe", "cells_evaluated"])
        for rep in reports:
            writer.writerow([rep.id, rep.name,
                             repr(rep.max_ffa), repr(rep.log10_max_ffa),
                             "true" if rep.unsafe else "false",
                             rep.cells_evaluated])


def write_chart_tsv(reports: list[RiskReport], path) -> None:
    """Bar-chart-ready (name, log10_max_ffa) pairs."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("name\tlog10_max_ffa\n")
        for rep in reports:
            fh.write(f"{rep.name}\t{repr(rep.log10_max_ffa)}\n")
