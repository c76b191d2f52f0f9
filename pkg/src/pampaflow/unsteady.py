"""Simplified 2D unsteady flow over a DEM (explicit local-inertial scheme).

Momentum keeps gravity and friction and drops advection; the face update is

    q_new = (q - g * h_face * dt * d(z+h)/ds) / (1 + g * dt * n^2 * |q| / h_face^(7/3))

with the face depth taken as max of the adjacent water surfaces minus max of
the adjacent bed elevations.  Mass moves by face-flux divergence with a
donor-cell limiter that keeps depths non-negative and conserves volume.

Inflow enters as a source over the cells the inflow segment touches; every
other grid-edge cell is a free outfall that releases Manning-type flow when
the water surface tilts outward.  All updates are plain vectorized
arithmetic with a fixed order, so runs are bit-reproducible.

Unit-discharge storage convention: qx[i, j] is the flow across the east
face of cell (i, j), positive eastward; qy[i, j] is the flow across the
south face, positive toward larger row indices.  The last column of qx and
last row of qy are domain-edge faces and stay zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (GridFormatError, RegionError, SimulationUnstableError,
                     ToolkitError)
from .geometry import point_polyline_distance, segment_intersects_rect
from .raster import Grid, read_ascii_grid, write_ascii_grid

GRAVITY = 9.80665

# Depth floor for the CFL wave speed so a dry domain still takes finite steps.
MIN_CFL_DEPTH = 0.01


@dataclass
class SimConfig:
    """Solver parameters; defaults suit sheet flow on bare desert pavement."""

    duration: float
    output_interval: float
    manning_n: float = 0.035
    cfl: float = 0.7
    dry_depth: float = 1e-4

    def __post_init__(self):
        if not (self.duration > 0):
            raise ValueError("duration must be > 0")
        if not (self.output_interval > 0):
            raise ValueError("output_interval must be > 0")
        if not (self.manning_n > 0):
            raise ValueError("manning_n must be > 0")
        if not (0 < self.cfl <= 1):
            raise ValueError("cfl must be in (0, 1]")
        if not (self.dry_depth > 0):
            raise ValueError("dry_depth must be > 0")


@dataclass
class InflowBoundary:
    """Line segment carrying a constant discharge or a (t, Q) hydrograph."""

    segment: tuple[tuple[float, float], tuple[float, float]]
    discharge: float | None = None
    hydrograph: list[tuple[float, float]] | None = None

    def __post_init__(self):
        if (self.discharge is None) == (self.hydrograph is None):
            raise ValueError("provide exactly one of discharge or hydrograph")
        if self.discharge is not None and self.discharge < 0:
            raise ValueError("discharge must be >= 0")
        if self.hydrograph is not None:
            if not self.hydrograph:
                raise ValueError("hydrograph must not be empty")
            times = [t for t, _ in self.hydrograph]
            if sorted(times) != times:
                raise ValueError("hydrograph times must be non-decreasing")
            if any(q < 0 for _, q in self.hydrograph):
                raise ValueError("hydrograph discharge must be >= 0")

    def discharge_at(self, t: float) -> float:
        if self.discharge is not None:
            return self.discharge
        times = np.array([p[0] for p in self.hydrograph], dtype=np.float64)
        flows = np.array([p[1] for p in self.hydrograph], dtype=np.float64)
        return float(np.interp(t, times, flows))


@dataclass
class CulvertEdit:
    """Channel carved through an obstruction along a polyline."""

    path: list[tuple[float, float]]
    width: float
    invert_drop: float

    def __post_init__(self):
        if len(self.path) < 2:
            raise ValueError("culvert path needs at least 2 points")
        if not (self.invert_drop > 0):
            raise ValueError("invert_drop must be > 0")


@dataclass
class FlowState:
    """Water depth and face unit discharges at simulation time t."""

    depth: Grid
    qx: Grid
    qy: Grid
    t: float
    cumulative_inflow: float = 0.0
    cumulative_outflow: float = 0.0


def carve_culvert(dem: Grid, edit: CulvertEdit) -> Grid:
    """Lower all cells within width/2 of the path to the path minimum minus
    the invert drop, leaving every other cell untouched."""
    if edit.width < dem.cell_size:
        raise ValueError("culvert width must be at least one cell")
    half = edit.width / 2.0
    xs = [p[0] for p in edit.path]
    ys = [p[1] for p in edit.path]
    cs = dem.cell_size
    gx0, gy0, gx1, gy1 = dem.world_bounds()

    c_lo = max(0, int(math.floor((min(xs) - half - gx0) / cs)))
    c_hi = min(dem.width - 1, int(math.floor((max(xs) + half - gx0) / cs)))
    r_from_y = lambda y: dem.height - 1 - int(math.floor((y - gy0) / cs))
    r_lo = max(0, r_from_y(max(ys) + half))
    r_hi = min(dem.height - 1, r_from_y(min(ys) - half))

    hit: list[tuple[int, int]] = []
    for r in range(r_lo, r_hi + 1):
        for c in range(c_lo, c_hi + 1):
            x, y = dem.cell_center(r, c)
            if point_polyline_distance(x, y, edit.path) <= half:
                hit.append((r, c))
    if not hit:
        raise RegionError("culvert path lies outside the grid extent")

    valid = dem.valid_mask
    touched = [(r, c) for r, c in hit if valid[r, c]]
    if not touched:
        raise RegionError("culvert path touches only nodata cells")
    floor = min(dem.values[r, c] for r, c in touched)
    target = floor - edit.invert_drop

    out = dem.values.copy()
    for r, c in touched:
        if out[r, c] > target:
            out[r, c] = target
    return dem.new_like(out)


def _segment_cells(grid: Grid, segment) -> list[tuple[int, int]]:
    """Valid cells whose (closed) square the segment touches, row-major."""
    (x1, y1), (x2, y2) = segment
    cs = grid.cell_size
    gx0, gy0, gx1, gy1 = grid.world_bounds()
    c_lo = max(0, int(math.floor((min(x1, x2) - gx0) / cs)) - 1)
    c_hi = min(grid.width - 1, int(math.floor((max(x1, x2) - gx0) / cs)) + 1)
    rs_lo = max(0, int(math.floor((min(y1, y2) - gy0) / cs)) - 1)
    rs_hi = min(grid.height - 1, int(math.floor((max(y1, y2) - gy0) / cs)) + 1)
    valid = grid.valid_mask

    cells: list[tuple[int, int]] = []
    for r in range(grid.height - 1 - rs_hi, grid.height - rs_lo):
        if r < 0 or r >= grid.height:
            continue
        y_s = gy0 + (grid.height - r - 1) * cs
        for c in range(c_lo, c_hi + 1):
            x_w = gx0 + c * cs
            if valid[r, c] and segment_intersects_rect(
                    x1, y1, x2, y2, (x_w, y_s, x_w + cs, y_s + cs)):
                cells.append((r, c))
    return cells


def simulate(dem: Grid, inflow: InflowBoundary, config: SimConfig) -> list[FlowState]:
    """Run the solver and return snapshots every output_interval seconds.

    The DEM must be nodata-free.  The returned states carry cumulative
    inflow and outflow volumes for mass-balance checks.  Raises
    SimulationUnstableError with the last state if depth or discharge stops
    being finite.
    """
    if not dem.valid_mask.all():
        raise ToolkitError("simulation requires a nodata-free DEM; fill holes first")

    z = dem.values
    hgt, wid = z.shape
    cs = dem.cell_size
    n2 = config.manning_n * config.manning_n
    g = GRAVITY
    dry = config.dry_depth

    inflow_cells = _segment_cells(dem, inflow.segment)
    if not inflow_cells:
        raise RegionError("inflow segment does not intersect any valid cell")
    in_rows = np.array([r for r, _ in inflow_cells])
    in_cols = np.array([c for _, c in inflow_cells])
    n_in = len(inflow_cells)

    is_inflow = np.zeros((hgt, wid), dtype=bool)
    is_inflow[in_rows, in_cols] = True

    h = np.zeros((hgt, wid), dtype=np.float64)
    qx = np.zeros((hgt, wid), dtype=np.float64)
    qy = np.zeros((hgt, wid), dtype=np.float64)

    t = 0.0
    cum_in = 0.0
    cum_out = 0.0
    next_out = config.output_interval
    snapshots: list[FlowState] = []

    def snapshot() -> FlowState:
        return FlowState(
            depth=dem.new_like(h),
            qx=dem.new_like(qx),
            qy=dem.new_like(qy),
            t=t,
            cumulative_inflow=cum_in,
            cumulative_outflow=cum_out,
        )

    while t < config.duration - 1e-12:
        h_max = float(h.max())
        wave_depth = max(h_max, dry, MIN_CFL_DEPTH)
        dt = config.cfl * cs / math.sqrt(g * wave_depth)
        dt = min(dt, next_out - t, config.duration - t)
        if dt <= 0:
            dt = min(next_out, config.duration) - t

        discharge = inflow.discharge_at(t)
        dh_in = discharge * dt / (n_in * cs * cs)

        eta = z + h

        # momentum on interior east faces
        if wid > 1:
            eta_l, eta_r = eta[:, :-1], eta[:, 1:]
            hf = np.maximum(eta_l, eta_r) - np.maximum(z[:, :-1], z[:, 1:])
            wet = hf > dry
            hf_safe = np.maximum(hf, dry)
            slope = (eta_r - eta_l) / cs
            q = qx[:, :-1]
            q_new = (q - g * hf * dt * slope) / (1.0 + g * dt * n2 * np.abs(q) / hf_safe ** (7.0 / 3.0))
            qx[:, :-1] = np.where(wet, q_new, 0.0)

        # momentum on interior south faces
        if hgt > 1:
            eta_n, eta_s = eta[:-1, :], eta[1:, :]
            hf = np.maximum(eta_n, eta_s) - np.maximum(z[:-1, :], z[1:, :])
            wet = hf > dry
            hf_safe = np.maximum(hf, dry)
            slope = (eta_s - eta_n) / cs
            q = qy[:-1, :]
            q_new = (q - g * hf * dt * slope) / (1.0 + g * dt * n2 * np.abs(q) / hf_safe ** (7.0 / 3.0))
            qy[:-1, :] = np.where(wet, q_new, 0.0)

        # free outfall on grid-edge cells away from the inflow: Manning
        # normal flow continuing the outward bed slope; edges where the bed
        # does not fall outward stay closed
        q_bnd = np.zeros((hgt, wid), dtype=np.float64)
        for edge_sel, inner_sel in (
            ((0, slice(None)), (1, slice(None)) if hgt > 1 else None),
            ((hgt - 1, slice(None)), (hgt - 2, slice(None)) if hgt > 1 else None),
            ((slice(None), 0), (slice(None), 1) if wid > 1 else None),
            ((slice(None), wid - 1), (slice(None), wid - 2) if wid > 1 else None),
        ):
            if inner_sel is None:
                continue
            h_edge = h[edge_sel]
            s_bed = np.clip((z[inner_sel] - z[edge_sel]) / cs, 0.0, None)
            q_out = np.where(
                (h_edge > dry) & ~is_inflow[edge_sel],
                h_edge ** (5.0 / 3.0) * np.sqrt(s_bed) / config.manning_n,
                0.0)
            q_bnd[edge_sel] = q_bnd[edge_sel] + q_out

        # donor-cell limiter: a cell may not export more volume than it holds
        qx_e = qx
        qx_w = np.zeros_like(qx)
        qx_w[:, 1:] = qx[:, :-1]
        qy_s = qy
        qy_n = np.zeros_like(qy)
        qy_n[1:, :] = qy[:-1, :]

        outflux = (np.maximum(qx_e, 0.0) + np.maximum(-qx_w, 0.0)
                   + np.maximum(qy_s, 0.0) + np.maximum(-qy_n, 0.0) + q_bnd)
        avail = h.copy()
        avail[in_rows, in_cols] += dh_in
        need = outflux * dt / cs
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(need > avail, avail / np.maximum(need, 1e-300), 1.0)
        scale = np.clip(scale, 0.0, 1.0)

        if wid > 1:
            q = qx[:, :-1]
            qx[:, :-1] = q * np.where(q > 0, scale[:, :-1], scale[:, 1:])
        if hgt > 1:
            q = qy[:-1, :]
            qy[:-1, :] = q * np.where(q > 0, scale[:-1, :], scale[1:, :])
        q_bnd = q_bnd * scale

        qx_w[:, 1:] = qx[:, :-1]
        qy_n[1:, :] = qy[:-1, :]
        net = qx_w - qx + qy_n - qy - q_bnd

        # inflow lands before the divergence so the limiter bound holds
        h[in_rows, in_cols] += dh_in
        h = h + net * (dt / cs)
        np.maximum(h, 0.0, out=h)

        cum_in += discharge * dt
        cum_out += float(q_bnd.sum()) * cs * dt
        t += dt

        if not (np.isfinite(h).all() and np.isfinite(qx).all() and np.isfinite(qy).all()):
            raise SimulationUnstableError(
                f"non-finite depth or discharge at t={t:.6g} s", snapshot())

        if t >= next_out - 1e-9 or t >= config.duration - 1e-12:
            snapshots.append(snapshot())
            while next_out <= t + 1e-9:
                next_out += config.output_interval

    return snapshots


def velocity_field(state: FlowState, dry_depth: float = 1e-4) -> Grid:
    """Cell-centered flow speed in m/s; dry cells (h <= dry_depth) are 0.

    Face discharges are averaged to cell centers before dividing by depth;
    at the west and north domain edges the single available face is used.
    """
    h = state.depth.values
    qx = state.qx.values
    qy = state.qy.values

    qx_c = qx.copy()
    if qx.shape[1] > 1:
        qx_c[:, 1:] = 0.5 * (qx[:, :-1] + qx[:, 1:])
    qy_c = qy.copy()
    if qy.shape[0] > 1:
        qy_c[1:, :] = 0.5 * (qy[:-1, :] + qy[1:, :])

    wet = h > dry_depth
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(wet, qx_c / h, 0.0)
        v = np.where(wet, qy_c / h, 0.0)
    speed = np.hypot(u, v)
    return state.depth.new_like(speed)


def total_volume(state: FlowState) -> float:
    """Stored water volume in m^3."""
    cs = state.depth.cell_size
    return float(state.depth.values.sum()) * cs * cs


@dataclass
class Scenario:
    """Self-contained simulation description loaded from JSON."""

    dem_path: Path
    inflow: InflowBoundary
    config: SimConfig
    culverts: list[CulvertEdit] = field(default_factory=list)


def load_scenario(path) -> Scenario:
    """Read a scenario JSON file; the DEM path resolves against the file."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        dem_path = Path(doc["dem"])
        if not dem_path.is_absolute():
            dem_path = path.parent / dem_path
        inf = doc["inflow"]
        seg = ((float(inf["segment"][0][0]), float(inf["segment"][0][1])),
               (float(inf["segment"][1][0]), float(inf["segment"][1][1])))
        hydro = inf.get("hydrograph")
        inflow = InflowBoundary(
            segment=seg,
            discharge=inf.get("discharge"),
            hydrograph=[(float(t), float(q)) for t, q in hydro] if hydro else None,
        )
        cfg_doc = doc["config"]
        config = SimConfig(
            duration=float(cfg_doc["duration"]),
            output_interval=float(cfg_doc["output_interval"]),
            manning_n=float(cfg_doc.get("manning_n", 0.035)),
            cfl=float(cfg_doc.get("cfl", 0.7)),
            dry_depth=float(cfg_doc.get("dry_depth", 1e-4)),
        )
        culverts = [
            CulvertEdit(path=[(float(x), float(y)) for x, y in c["path"]],
                        width=float(c["width"]),
                        invert_drop=float(c["invert_drop"]))
            for c in doc.get("culverts", [])
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise GridFormatError(f"{path}: malformed scenario: {exc}") from exc
    return Scenario(dem_path, inflow, config, culverts)


def run_scenario(scenario: Scenario, outdir) -> list[Path]:
    """Simulate a scenario and write depth_<t>.asc / speed_<t>.asc snapshots."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    dem = read_ascii_grid(scenario.dem_path)
    for edit in scenario.culverts:
        dem = carve_culvert(dem, edit)
    states = simulate(dem, scenario.inflow, scenario.config)
    written: list[Path] = []
    for state in states:
        tag = np.format_float_positional(state.t, trim="-")
        depth_path = outdir / f"depth_{tag}.asc"
        speed_path = outdir / f"speed_{tag}.asc"
        write_ascii_grid(state.depth, depth_path)
        write_ascii_grid(velocity_field(state, scenario.config.dry_depth), speed_path)
        written.extend([depth_path, speed_path])
    return written
