"""Command-line pipeline driver.

One subcommand per processing step so the whole workflow stays auditable
and composable:

    build-dem  fill  flowdir  flowacc  watershed  vectorize  link-coarse
    flood-spread  score  simulate  carve  render

Exit codes: 0 success, 1 usage error, 2 data error.  `--manifest PATH`
appends a JSON-lines record (parameters plus input/output sha256 digests)
for every executed step; `--threads N` caps internal parallelism without
changing any result.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import dem as dem_mod
from . import manifest as manifest_mod
from . import mosaic as mosaic_mod
from . import plots as plots_mod
from . import risk as risk_mod
from . import unsteady as unsteady_mod
from .errors import ToolkitError
from .floodspread import FloodSpreadConfig, flooding_flow_accumulation
from .hydrology import (DEFAULT_FILL_EPSILON, FlowDirGrid, StreamNetwork,
                        compute_flow_accumulation, compute_flow_direction,
                        fill_depressions, label_watersheds, vectorize_network)
from .raster import read_ascii_grid, render_falsecolor, write_ascii_grid


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems instead of exiting with code 2."""

    def error(self, message):
        raise _UsageError(message)


def _parse_extent(text: str) -> dem_mod.BoundingBox:
    parts = text.split(",")
    if len(parts) != 4:
        raise _UsageError("--extent needs x_min,y_min,x_max,y_max")
    try:
        x0, y0, x1, y1 = (float(p) for p in parts)
    except ValueError:
        raise _UsageError("--extent values must be numeric") from None
    return dem_mod.BoundingBox(x0, y0, x1, y1)


def _parse_path_points(text: str) -> list[tuple[float, float]]:
    points = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        xy = chunk.split(",")
        if len(xy) != 2:
            raise _UsageError("--path points look like x,y;x,y;...")
        try:
            points.append((float(xy[0]), float(xy[1])))
        except ValueError:
            raise _UsageError("--path coordinates must be numeric") from None
    return points


def build_parser() -> _Parser:
    parser = _Parser(prog="pampaflow", description=__doc__.splitlines()[0],
                     allow_abbrev=False)
    parser.add_argument("--manifest", metavar="PATH",
                        help="append a JSON-lines step record to this file")
    parser.add_argument("--threads", type=int, default=None, metavar="N",
                        help="cap internal parallelism (results never depend on it)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("build-dem", allow_abbrev=False,
                       help="grid points, block-minimum, fill holes")
    p.add_argument("--points", required=True, help="x y z text file")
    p.add_argument("--fine-res", type=float, default=0.10)
    p.add_argument("--factor", type=int, default=4)
    p.add_argument("--extent", default=None,
                   help="x_min,y_min,x_max,y_max (default: point bounds)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("fill", allow_abbrev=False, help="fill depressions")
    p.add_argument("--dem", required=True)
    p.add_argument("--epsilon", type=float, default=DEFAULT_FILL_EPSILON)
    p.add_argument("--out", required=True)

    p = sub.add_parser("flowdir", allow_abbrev=False,
                       help="D8 directions and steepness")
    p.add_argument("--dem", required=True, help="depression-filled DEM")
    p.add_argument("--out", required=True, help="direction-code grid")
    p.add_argument("--steepness", default=None, help="optional steepness grid")

    p = sub.add_parser("flowacc", allow_abbrev=False, help="flow accumulation")
    p.add_argument("--flowdir", required=True)
    p.add_argument("--seeds", default=None, help="row col accumulation text file")
    p.add_argument("--out", required=True)

    p = sub.add_parser("watershed", allow_abbrev=False, help="label watersheds")
    p.add_argument("--flowdir", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("vectorize", allow_abbrev=False,
                       help="stream links and junction nodes")
    p.add_argument("--accum", required=True)
    p.add_argument("--flowdir", required=True)
    p.add_argument("--threshold", type=float, required=True,
                   help="channel threshold in cells (no default)")
    p.add_argument("--out", required=True, help="network JSON")

    p = sub.add_parser("link-coarse", allow_abbrev=False,
                       help="seed fine grid from a coarse network")
    p.add_argument("--network", required=True, help="coarse network JSON")
    p.add_argument("--fine-dem", required=True)
    p.add_argument("--min-accum", type=float, default=0.0)
    p.add_argument("--out", required=True, help="seed text file")

    p = sub.add_parser("flood-spread", allow_abbrev=False,
                       help="flooding flow accumulation layer")
    p.add_argument("--dem", required=True)
    p.add_argument("--accum", required=True)
    p.add_argument("--kernel", type=int, default=41)
    p.add_argument("--rise", type=float, default=0.10)
    p.add_argument("--sigma", type=float, default=None,
                   help="Gaussian width in cells (default (kernel-1)/6)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("score", allow_abbrev=False,
                       help="rank regions by flood danger")
    p.add_argument("--ffa", required=True)
    p.add_argument("--regions", required=True, help="GeoJSON polygons")
    p.add_argument("--threshold", type=float, default=risk_mod.DEFAULT_DANGER_THRESHOLD)
    p.add_argument("--threshold-area", type=float, default=None,
                   help="danger area in m^2, converted using the grid cell size")
    p.add_argument("--out", required=True, help="report CSV")
    p.add_argument("--tsv", default=None, help="bar-chart-ready TSV")
    p.add_argument("--chart", default=None, help="bar-chart PNG")

    p = sub.add_parser("simulate", allow_abbrev=False,
                       help="2D unsteady flow from a scenario file")
    p.add_argument("--scenario", required=True)
    p.add_argument("--outdir", required=True)

    p = sub.add_parser("carve", allow_abbrev=False,
                       help="carve a culvert channel into a DEM")
    p.add_argument("--dem", required=True)
    p.add_argument("--path", required=True, help="polyline x,y;x,y;...")
    p.add_argument("--width", type=float, required=True)
    p.add_argument("--drop", type=float, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("render", allow_abbrev=False,
                       help="false-color PPM image of a grid")
    p.add_argument("--grid", required=True)
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--out", required=True)

    return parser


def _read_flowdir(path) -> FlowDirGrid:
    return FlowDirGrid.from_grids(read_ascii_grid(path))


def _run(args) -> tuple[dict, list, list]:
    """Dispatch one subcommand; returns (parameters, inputs, outputs)."""
    cmd = args.command

    if cmd == "build-dem":
        cloud = dem_mod.read_xyz(args.points)
        if args.extent is not None:
            extent = _parse_extent(args.extent)
        else:
            b = cloud.bounds()
            res = args.fine_res
            # pad so boundary points stay inside the half-open cell cover
            extent = dem_mod.BoundingBox(b.x_min, b.y_min,
                                         b.x_min + (int((b.x_max - b.x_min) / res) + 1) * res,
                                         b.y_min + (int((b.y_max - b.y_min) / res) + 1) * res)
        config = dem_mod.DemBuildConfig(extent=extent, fine_resolution=args.fine_res,
                                        aggregate_factor=args.factor)
        grid = dem_mod.build_dem(cloud, config)
        write_ascii_grid(grid, args.out)
        params = {"fine_res": args.fine_res, "factor": args.factor,
                  "extent": [extent.x_min, extent.y_min, extent.x_max, extent.y_max]}
        return params, [args.points], [args.out]

    if cmd == "fill":
        grid = fill_depressions(read_ascii_grid(args.dem), epsilon=args.epsilon)
        write_ascii_grid(grid, args.out)
        return {"epsilon": args.epsilon}, [args.dem], [args.out]

    if cmd == "flowdir":
        flow = compute_flow_direction(read_ascii_grid(args.dem))
        dgrid, sgrid = flow.to_grids()
        write_ascii_grid(dgrid, args.out)
        outputs = [args.out]
        if args.steepness:
            write_ascii_grid(sgrid, args.steepness)
            outputs.append(args.steepness)
        return {}, [args.dem], outputs

    if cmd == "flowacc":
        flow = _read_flowdir(args.flowdir)
        seeds = None
        inputs = [args.flowdir]
        if args.seeds:
            seeds = [(s.cell, s.accumulation) for s in mosaic_mod.read_seeds(args.seeds)]
            inputs.append(args.seeds)
        grid = compute_flow_accumulation(flow, seeds)
        write_ascii_grid(grid, args.out)
        return {"seeds": bool(args.seeds)}, inputs, [args.out]

    if cmd == "watershed":
        grid = label_watersheds(_read_flowdir(args.flowdir))
        write_ascii_grid(grid, args.out)
        return {}, [args.flowdir], [args.out]

    if cmd == "vectorize":
        network = vectorize_network(read_ascii_grid(args.accum),
                                    _read_flowdir(args.flowdir), args.threshold)
        Path(args.out).write_text(network.to_json() + "\n", encoding="utf-8")
        return ({"threshold": args.threshold},
                [args.accum, args.flowdir], [args.out])

    if cmd == "link-coarse":
        network = StreamNetwork.from_json(Path(args.network).read_text(encoding="utf-8"))
        fine = read_ascii_grid(args.fine_dem)
        seeds = mosaic_mod.derive_inlet_seeds(network, network.transform,
                                              fine, args.min_accum)
        mosaic_mod.write_seeds(seeds, args.out)
        return ({"min_accum": args.min_accum},
                [args.network, args.fine_dem], [args.out])

    if cmd == "flood-spread":
        config = FloodSpreadConfig(kernel_size=args.kernel, rise=args.rise,
                                   sigma=args.sigma)
        grid = flooding_flow_accumulation(read_ascii_grid(args.dem),
                                          read_ascii_grid(args.accum), config)
        write_ascii_grid(grid, args.out)
        params = {"kernel": args.kernel, "rise": args.rise,
                  "sigma": config.effective_sigma}
        return params, [args.dem, args.accum], [args.out]

    if cmd == "score":
        ffa = read_ascii_grid(args.ffa)
        regions = risk_mod.read_regions_geojson(args.regions)
        threshold = args.threshold
        threshold_source = "cells"
        if args.threshold_area is not None:
            threshold = risk_mod.threshold_from_area(args.threshold_area, ffa.cell_size)
            threshold_source = "area"
        reports = risk_mod.score_geoglyphs(ffa, regions, threshold)
        risk_mod.write_report_csv(reports, args.out)
        outputs = [args.out]
        if args.tsv:
            risk_mod.write_chart_tsv(reports, args.tsv)
            outputs.append(args.tsv)
        if args.chart:
            plots_mod.render_risk_chart(reports, threshold, args.chart)
            outputs.append(args.chart)
        print(f"threshold used: {threshold:g} cells (from {threshold_source}); "
              f"{sum(r.unsafe for r in reports)} of {len(reports)} regions unsafe")
        params = {"threshold": threshold, "threshold_source": threshold_source}
        return params, [args.ffa, args.regions], outputs

    if cmd == "simulate":
        scenario = unsteady_mod.load_scenario(args.scenario)
        written = unsteady_mod.run_scenario(scenario, args.outdir)
        return ({"duration": scenario.config.duration},
                [args.scenario, scenario.dem_path], [str(p) for p in written])

    if cmd == "carve":
        edit = unsteady_mod.CulvertEdit(path=_parse_path_points(args.path),
                                        width=args.width, invert_drop=args.drop)
        grid = unsteady_mod.carve_culvert(read_ascii_grid(args.dem), edit)
        write_ascii_grid(grid, args.out)
        return ({"width": args.width, "drop": args.drop, "path": args.path},
                [args.dem], [args.out])

    if cmd == "render":
        render_falsecolor(read_ascii_grid(args.grid), args.threshold, args.out)
        return {"threshold": args.threshold}, [args.grid], [args.out]

    raise _UsageError("missing subcommand")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _UsageError("missing subcommand")
        if args.threads is not None and args.threads < 1:
            raise _UsageError("--threads must be >= 1")
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"pampaflow: error: {exc}", file=sys.stderr)
        return 1

    try:
        params, inputs, outputs = _run(args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"pampaflow: error: {exc}", file=sys.stderr)
        return 1
    except (ToolkitError, OSError, json.JSONDecodeError) as exc:
        print(f"pampaflow: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"pampaflow: error: {exc}", file=sys.stderr)
        return 2

    if args.manifest:
        if args.threads is not None:
            params = dict(params, threads=args.threads)
        manifest_mod.append_step(args.manifest, args.command, params,
                                 inputs, outputs)
    return 0


def entry_point() -> None:
    sys.exit(main(sys.argv[1:]))
