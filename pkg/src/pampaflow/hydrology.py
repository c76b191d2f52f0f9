"""D8 raster hydrology: depression filling, flow routing, accumulation,
watershed labeling, and stream-network vectorization.

Conventions
-----------
Direction codes 0..7 stand for E, SE, S, SW, W, NW, N, NE; this is also the
tie-break order when several neighbors offer the same descent.  Code 8 marks
an outlet (flow leaves the grid), -1 marks nodata.  Nodata cells are
impassable: they never give or receive flow, and depression filling routes
around them.

The filled surface satisfies, for every valid non-seed cell c,

    F(c) = max(z(c), eps + min over valid 8-neighbors of F)

where the seeds are the valid cells on the grid edge.  Seeds keep their
input elevation.  This is the minimal raising that leaves every non-seed
cell a strictly lower neighbor, i.e. priority-flood semantics with an
epsilon gradient across flats.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (FlowCycleError, GridShapeError, IsolatedRegionError,
                     ToolkitError, UnfilledPitError)
from .raster import CellIndex, GeoTransform, Grid

# Direction encoding; index order is the tie-break order.
E, SE, S, SW, W, NW, N, NE = range(8)
OUTLET = 8
NODATA_DIR = -1

DIR_NAMES = ("E", "SE", "S", "SW", "W", "NW", "N", "NE")
DR = (0, 1, 1, 1, 0, -1, -1, -1)
DC = (1, 1, 0, -1, -1, -1, 0, 1)
_DIAG = math.sqrt(2.0)
DIR_UNIT_DISTANCE = (1.0, _DIAG, 1.0, _DIAG, 1.0, _DIAG, 1.0, _DIAG)

DEFAULT_FILL_EPSILON = 1e-5


@dataclass
class FlowDirGrid:
    """Per-cell D8 drainage direction plus steepness (drop over distance).

    `direction` is int8 with the codes above; `steepness` is 0 for OUTLET
    and nodata cells.  The transform ties cells to world coordinates.
    """

    direction: np.ndarray
    steepness: np.ndarray
    transform: GeoTransform

    def __post_init__(self):
        self.direction = np.asarray(self.direction, dtype=np.int8)
        self.steepness = np.asarray(self.steepness, dtype=np.float64)
        if self.direction.shape != self.steepness.shape:
            raise GridShapeError("direction and steepness shapes differ")

    @property
    def height(self) -> int:
        return self.direction.shape[0]

    @property
    def width(self) -> int:
        return self.direction.shape[1]

    @property
    def valid_mask(self) -> np.ndarray:
        return self.direction != NODATA_DIR

    def downstream_of(self, row: int, col: int) -> CellIndex | None:
        code = int(self.direction[row, col])
        if code < 0 or code == OUTLET:
            return None
        return CellIndex(row + DR[code], col + DC[code])

    def to_grids(self, nodata: float = -9999.0) -> tuple[Grid, Grid]:
        """Direction codes and steepness as serializable grids."""
        h, w = self.direction.shape
        dvals = np.where(self.direction == NODATA_DIR, nodata,
                         self.direction.astype(np.float64))
        svals = np.where(self.direction == NODATA_DIR, nodata, self.steepness)
        return (Grid(w, h, self.transform, dvals, nodata),
                Grid(w, h, self.transform, svals, nodata))

    @classmethod
    def from_grids(cls, direction: Grid, steepness: Grid | None = None) -> "FlowDirGrid":
        codes = np.full((direction.height, direction.width), NODATA_DIR, dtype=np.int8)
        valid = direction.valid_mask
        raw = direction.values[valid]
        if raw.size and (np.rint(raw) != raw).any():
            raise ToolkitError("direction grid holds non-integer codes")
        as_int = np.rint(direction.values).astype(np.int64)
        if valid.any() and ((as_int[valid] < 0) | (as_int[valid] > OUTLET)).any():
            raise ToolkitError("direction grid holds codes outside 0..8")
        codes[valid] = as_int[valid].astype(np.int8)
        if steepness is not None:
            if (steepness.width, steepness.height) != (direction.width, direction.height):
                raise GridShapeError("steepness grid dimensions differ from direction grid")
            steep = np.where(valid, steepness.values, 0.0)
        else:
            steep = np.zeros_like(codes, dtype=np.float64)
        return cls(codes, steep, direction.transform)


def fill_depressions(dem: Grid, epsilon: float = DEFAULT_FILL_EPSILON) -> Grid:
    """Priority-flood depression filling with an epsilon gradient on flats.

    Output is everywhere >= input; every valid cell gains a non-ascending
    8-connected path to the grid edge, and every valid non-edge cell gains a
    strictly lower valid neighbor.  Raises IsolatedRegionError when a valid
    region is sealed off by nodata and cannot reach the grid edge.
    """
    valid = dem.valid_mask
    if not valid.any():
        raise ToolkitError("cannot fill an all-nodata grid")
    h, w = dem.height, dem.width
    z = dem.values
    filled = z.copy()
    closed = ~valid

    heap: list[tuple[float, int]] = []
    edge = np.zeros((h, w), dtype=bool)
    edge[0, :] = edge[-1, :] = True
    edge[:, 0] = edge[:, -1] = True
    for flat in np.flatnonzero((edge & valid).ravel()):
        r, c = divmod(int(flat), w)
        closed[r, c] = True
        heapq.heappush(heap, (float(z[r, c]), int(flat)))
    if not heap:
        raise IsolatedRegionError(
            "no valid cell on the grid edge; the valid region cannot drain")

    while heap:
        value, flat = heapq.heappop(heap)
        r, c = divmod(flat, w)
        for k in range(8):
            nr, nc = r + DR[k], c + DC[k]
            if nr < 0 or nr >= h or nc < 0 or nc >= w or closed[nr, nc]:
                continue
            closed[nr, nc] = True
            cand = value + epsilon
            nz = z[nr, nc]
            filled[nr, nc] = nz if nz > cand else cand
            heapq.heappush(heap, (float(filled[nr, nc]), nr * w + nc))

    if (~closed).any():
        rr, cc = np.nonzero(~closed)
        raise IsolatedRegionError(
            f"{rr.size} valid cells are sealed off by nodata and cannot drain "
            f"to the grid edge (first at row {rr[0]}, col {cc[0]})")

    out = np.where(valid, filled, dem.nodata)
    return dem.new_like(out)


def compute_flow_direction(filled_dem: Grid) -> FlowDirGrid:
    """Steepest-descent D8 directions on a depression-filled DEM.

    Drop is divided by center-to-center distance (diagonals are cell_size
    times sqrt(2)); ties resolve in the fixed order E, SE, S, SW, W, NW, N,
    NE.  Valid cells with no strictly lower valid neighbor become OUTLET
    when they lie on the grid edge or have no valid neighbor at all;
    anywhere else they violate the filled-input precondition.
    """
    valid = filled_dem.valid_mask
    h, w = filled_dem.height, filled_dem.width
    cs = filled_dem.cell_size
    z = np.where(valid, filled_dem.values, np.inf)

    ratios = np.full((8, h, w), -np.inf, dtype=np.float64)
    has_valid_neighbor = np.zeros((h, w), dtype=bool)
    for k in range(8):
        dr, dc = DR[k], DC[k]
        nz = np.full((h, w), np.inf, dtype=np.float64)
        rs0, rs1 = max(dr, 0), h + min(dr, 0)
        cs0, cs1 = max(dc, 0), w + min(dc, 0)
        nz[rs0 - dr:rs1 - dr, cs0 - dc:cs1 - dc] = z[rs0:rs1, cs0:cs1]
        finite = np.isfinite(nz)
        has_valid_neighbor |= finite & valid
        ratios[k] = np.where(finite, (filled_dem.values - nz) / (cs * DIR_UNIT_DISTANCE[k]),
                             -np.inf)

    best = np.argmax(ratios, axis=0)
    best_ratio = np.take_along_axis(ratios, best[None], axis=0)[0]

    direction = np.full((h, w), NODATA_DIR, dtype=np.int8)
    steepness = np.zeros((h, w), dtype=np.float64)

    descending = valid & (best_ratio > 0)
    direction[descending] = best[descending].astype(np.int8)
    steepness[descending] = best_ratio[descending]

    stuck = valid & ~descending
    if stuck.any():
        edge = np.zeros((h, w), dtype=bool)
        edge[0, :] = edge[-1, :] = True
        edge[:, 0] = edge[:, -1] = True
        outlet = stuck & (edge | ~has_valid_neighbor)
        direction[outlet] = OUTLET
        bad = stuck & ~outlet
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise UnfilledPitError(
                f"interior cell (row {r}, col {c}) has no lower neighbor; "
                f"fill depressions first")

    return FlowDirGrid(direction, steepness, filled_dem.transform)


def _downstream_flat(flowdir: FlowDirGrid) -> np.ndarray:
    """Flat index of each cell's downstream neighbor, -1 for outlet/nodata."""
    h, w = flowdir.height, flowdir.width
    codes = flowdir.direction
    ds = np.full(h * w, -1, dtype=np.int64)
    for k in range(8):
        sel = codes == k
        if not sel.any():
            continue
        r, c = np.nonzero(sel)
        nr, nc = r + DR[k], c + DC[k]
        inside = (nr >= 0) & (nr < h) & (nc >= 0) & (nc < w)
        if not inside.all():
            j = np.flatnonzero(~inside)[0]
            raise ToolkitError(
                f"direction at (row {r[j]}, col {c[j]}) points off the grid")
        tgt = nr * w + nc
        if (codes.ravel()[tgt] == NODATA_DIR).any():
            j = np.flatnonzero(codes.ravel()[tgt] == NODATA_DIR)[0]
            raise ToolkitError(
                f"direction at (row {r[j]}, col {c[j]}) points into nodata")
        ds[r * w + c] = tgt
    return ds


def _find_cycle(ds: np.ndarray, start: int, w: int) -> list[tuple[int, int]]:
    seen: dict[int, int] = {}
    path: list[int] = []
    cur = start
    while cur >= 0 and cur not in seen:
        seen[cur] = len(path)
        path.append(cur)
        cur = int(ds[cur])
    if cur < 0:
        return []
    cyc = path[seen[cur]:]
    return [(f // w, f % w) for f in cyc]


def compute_flow_accumulation(flowdir: FlowDirGrid,
                              seeds: list[tuple[CellIndex, float]] | None = None,
                              nodata: float = -9999.0) -> Grid:
    """Self-inclusive contributing-cell counts, plus optional injected seeds.

    accum(c) = 1 + seed(c) + sum of accum over upstream neighbors, evaluated
    in topological order with a fixed neighbor gather order, so the result
    does not depend on evaluation schedule.
    """
    h, w = flowdir.height, flowdir.width
    valid = flowdir.valid_mask
    ds = _downstream_flat(flowdir)

    base = np.where(valid, 1.0, 0.0).ravel()
    if seeds:
        for cell, amount in seeds:
            r, c = cell
            if not (0 <= r < h and 0 <= c < w) or not valid[r, c]:
                raise ToolkitError(f"seed at (row {r}, col {c}) is outside the valid area")
            base[r * w + c] += float(amount)

    indeg = np.zeros(h * w, dtype=np.int64)
    np.add.at(indeg, ds[ds >= 0], 1)

    valid_flat = valid.ravel()
    order: list[int] = [int(f) for f in np.flatnonzero(valid_flat) if indeg[f] == 0]
    head = 0
    pending = indeg.copy()
    while head < len(order):
        cur = order[head]
        head += 1
        nxt = int(ds[cur])
        if nxt >= 0:
            pending[nxt] -= 1
            if pending[nxt] == 0:
                order.append(nxt)

    n_valid = int(valid_flat.sum())
    if len(order) != n_valid:
        remaining = next(int(f) for f in np.flatnonzero(valid_flat)
                         if pending[f] > 0)
        raise FlowCycleError(_find_cycle(ds, remaining, w))

    accum = base.copy()
    codes = flowdir.direction
    for cur in order:
        r, c = divmod(cur, w)
        total = base[cur]
        for k in range(8):
            nr, nc = r + DR[k], c + DC[k]
            if 0 <= nr < h and 0 <= nc < w:
                code = codes[nr, nc]
                if 0 <= code < 8 and nr + DR[code] == r and nc + DC[code] == c:
                    total += accum[nr * w + nc]
        accum[cur] = total

    out = np.where(valid_flat, accum, nodata).reshape(h, w)
    return Grid(w, h, flowdir.transform, out, nodata)


def label_watersheds(flowdir: FlowDirGrid, nodata: float = -9999.0) -> Grid:
    """Label every cell with the id of the outlet its D8 path reaches.

    Outlets are numbered 1..K in row-major order.
    """
    h, w = flowdir.height, flowdir.width
    valid = flowdir.valid_mask
    ds = _downstream_flat(flowdir)

    labels = np.zeros(h * w, dtype=np.int64)
    outlet_flats = np.flatnonzero((flowdir.direction == OUTLET).ravel())
    for i, f in enumerate(outlet_flats, start=1):
        labels[f] = i

    for start in np.flatnonzero(valid.ravel()):
        if labels[start]:
            continue
        trail = []
        cur = int(start)
        steps = 0
        while labels[cur] == 0:
            trail.append(cur)
            cur = int(ds[cur])
            steps += 1
            if cur < 0:
                raise ToolkitError("flow path ended at a non-outlet cell")
            if steps > h * w:
                raise FlowCycleError(_find_cycle(ds, int(start), w))
        lab = labels[cur]
        for f in trail:
            labels[f] = lab

    out = np.where(valid.ravel(), labels.astype(np.float64), nodata).reshape(h, w)
    return Grid(w, h, flowdir.transform, out, nodata)


@dataclass
class StreamLink:
    """Downstream-ordered run of channel cells between network nodes."""

    id: int
    cells: list[CellIndex]
    world: list[tuple[float, float]]
    head_accumulation: float
    tail_accumulation: float


@dataclass
class StreamNode:
    """Junction or outlet cell; incoming links end here, outgoing starts here."""

    cell: CellIndex
    world: tuple[float, float]
    incoming: list[int]
    outgoing: int | None


@dataclass
class StreamNetwork:
    links: list[StreamLink]
    nodes: list[StreamNode]
    transform: GeoTransform

    def junction_nodes(self) -> list[StreamNode]:
        return [n for n in self.nodes if len(n.incoming) >= 2]

    def to_json(self) -> str:
        doc = {
            "transform": {
                "origin_x": self.transform.origin_x,
                "origin_y": self.transform.origin_y,
                "cell_size": self.transform.cell_size,
            },
            "links": [
                {
                    "id": ln.id,
                    "cells": [[r, c] for r, c in ln.cells],
                    "world": [[x, y] for x, y in ln.world],
                    "head_accumulation": ln.head_accumulation,
                    "tail_accumulation": ln.tail_accumulation,
                }
                for ln in self.links
            ],
            "nodes": [
                {
                    "cell": [n.cell.row, n.cell.col],
                    "world": [n.world[0], n.world[1]],
                    "incoming": n.incoming,
                    "outgoing": n.outgoing,
                }
                for n in self.nodes
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "StreamNetwork":
        doc = json.loads(text)
        t = doc["transform"]
        transform = GeoTransform(t["origin_x"], t["origin_y"], t["cell_size"])
        links = [StreamLink(ln["id"],
                            [CellIndex(r, c) for r, c in ln["cells"]],
                            [(x, y) for x, y in ln["world"]],
                            ln["head_accumulation"], ln["tail_accumulation"])
                 for ln in doc["links"]]
        nodes = [StreamNode(CellIndex(*n["cell"]), tuple(n["world"]),
                            list(n["incoming"]), n["outgoing"])
                 for n in doc["nodes"]]
        return cls(links, nodes, transform)


def vectorize_network(accum: Grid, flowdir: FlowDirGrid,
                      channel_threshold: float) -> StreamNetwork:
    """Trace channel cells (accum >= threshold) into links and nodes.

    Nodes appear where two or more channel links combine and at channel
    outlets.  Each link records the accumulation at its head and tail.
    """
    if channel_threshold < 1:
        raise ValueError("channel_threshold must be >= 1")
    if (accum.height, accum.width) != (flowdir.height, flowdir.width):
        raise GridShapeError("accumulation and flow-direction dimensions differ")

    h, w = flowdir.height, flowdir.width
    valid = flowdir.valid_mask & accum.valid_mask
    channel = valid & (accum.values >= channel_threshold)
    if not channel.any():
        return StreamNetwork([], [], flowdir.transform)

    ds = _downstream_flat(flowdir)
    chan_flat = channel.ravel()

    in_deg = np.zeros(h * w, dtype=np.int64)
    src = np.flatnonzero(chan_flat)
    tgt = ds[src]
    feeds = tgt >= 0
    feeds[feeds] &= chan_flat[tgt[feeds]]
    np.add.at(in_deg, tgt[feeds], 1)

    is_junction = chan_flat & (in_deg >= 2)

    height_grid = Grid(w, h, flowdir.transform, np.zeros((h, w)), -9999.0)

    def world_of(flat: int) -> tuple[float, float]:
        return height_grid.cell_center(flat // w, flat % w)

    def trace(start: int) -> list[int]:
        path = [start]
        cur = start
        while True:
            nxt = int(ds[cur])
            if nxt < 0 or not chan_flat[nxt]:
                return path
            path.append(nxt)
            if is_junction[nxt]:
                return path
            cur = nxt

    links: list[StreamLink] = []
    acc_flat = accum.values.ravel()

    heads = [int(f) for f in np.flatnonzero(chan_flat & (in_deg == 0))]
    heads += [int(f) for f in np.flatnonzero(is_junction) if ds[f] >= 0 and chan_flat[ds[f]]]

    for head in heads:
        path = trace(head)
        if len(path) == 1 and is_junction[head]:
            continue
        links.append(StreamLink(
            id=len(links) + 1,
            cells=[CellIndex(f // w, f % w) for f in path],
            world=[world_of(f) for f in path],
            head_accumulation=float(acc_flat[path[0]]),
            tail_accumulation=float(acc_flat[path[-1]]),
        ))

    node_flats: list[int] = sorted(
        set(int(f) for f in np.flatnonzero(is_junction))
        | {ln_path_end for ln_path_end in
           (int(_cell_flat(ln.cells[-1], w)) for ln in links)
           if ds[ln_path_end] < 0 or not chan_flat[ds[ln_path_end]]}
    )

    nodes: list[StreamNode] = []
    for f in node_flats:
        incoming = [ln.id for ln in links if _cell_flat(ln.cells[-1], w) == f]
        outgoing = next((ln.id for ln in links
                         if _cell_flat(ln.cells[0], w) == f and len(ln.cells) > 1), None)
        nodes.append(StreamNode(CellIndex(f // w, f % w), world_of(f),
                                incoming, outgoing))

    return StreamNetwork(links, nodes, flowdir.transform)


def _cell_flat(cell: CellIndex, w: int) -> int:
    return cell.row * w + cell.col
