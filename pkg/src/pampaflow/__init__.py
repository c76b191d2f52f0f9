"""pampaflow: raster hydrology and flash-flood screening for desert terrain.

Pipeline overview: grid LiDAR points into a DEM, fill depressions, route D8
flow, accumulate, link coarse upstream catchments, spread accumulation into
a flooding-danger layer, score regions of interest, and, for the flagged
ones, run a simplified 2D unsteady-flow simulation with optional terrain
edits such as culverts.
"""

from .dem import (BoundingBox, DemBuildConfig, PointCloud, aggregate_min,
                  build_dem, fill_nodata_linear, rasterize_points, read_xyz,
                  write_xyz)
from .errors import (ExtentMismatchError, FlowCycleError, GridFormatError,
                     GridShapeError, IsolatedRegionError, RegionError,
                     SimulationUnstableError, ToolkitError, UnfilledPitError)
from .floodspread import (FloodSpreadConfig, flooding_flow_accumulation,
                          gaussian_kernel)
from .hydrology import (DEFAULT_FILL_EPSILON, NODATA_DIR, OUTLET, FlowDirGrid,
                        StreamLink, StreamNetwork, StreamNode,
                        compute_flow_accumulation, compute_flow_direction,
                        fill_depressions, label_watersheds, vectorize_network)
from .mosaic import InletSeed, derive_inlet_seeds, read_seeds, write_seeds
from .raster import (CellIndex, GeoTransform, Grid, read_ascii_grid,
                     render_falsecolor, write_ascii_grid)
from .risk import (DEFAULT_DANGER_THRESHOLD, GeoglyphRegion, RiskReport,
                   rasterize_polygon, read_regions_geojson, score_geoglyphs,
                   threshold_from_area, write_chart_tsv, write_report_csv)
from .unsteady import (CulvertEdit, FlowState, InflowBoundary, Scenario,
                       SimConfig, carve_culvert, load_scenario, run_scenario,
                       simulate, total_volume, velocity_field)

__version__ = "0.1.0"

__all__ = [
    "BoundingBox", "CellIndex", "CulvertEdit", "DEFAULT_DANGER_THRESHOLD",
    "DEFAULT_FILL_EPSILON", "DemBuildConfig", "ExtentMismatchError",
    "FloodSpreadConfig", "FlowCycleError", "FlowDirGrid", "FlowState",
    "GeoTransform", "GeoglyphRegion", "Grid", "GridFormatError",
    "GridShapeError", "InflowBoundary", "InletSeed", "IsolatedRegionError",
    "NODATA_DIR", "OUTLET", "PointCloud", "RegionError", "RiskReport",
    "Scenario", "SimConfig", "SimulationUnstableError", "StreamLink",
    "StreamNetwork", "StreamNode", "ToolkitError", "UnfilledPitError",
    "aggregate_min", "build_dem", "carve_culvert",
    "compute_flow_accumulation", "compute_flow_direction",
    "derive_inlet_seeds", "fill_depressions", "fill_nodata_linear",
    "flooding_flow_accumulation", "gaussian_kernel", "label_watersheds",
    "load_scenario", "rasterize_points", "rasterize_polygon",
    "read_ascii_grid", "read_regions_geojson", "read_seeds", "read_xyz",
    "render_falsecolor", "run_scenario", "score_geoglyphs", "simulate",
    "threshold_from_area", "total_volume", "vectorize_network",
    "velocity_field", "write_ascii_grid", "write_chart_tsv",
    "write_report_csv", "write_seeds", "write_xyz",
]
