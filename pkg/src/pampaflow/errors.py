"""Exception types shared across the toolkit.

Everything raised deliberately by the library derives from ToolkitError so
the CLI can map data problems to a single exit code.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all errors raised by pampaflow."""


class GridFormatError(ToolkitError):
    """A raster, network, seed, or scenario file violates its format."""


class GridShapeError(ToolkitError):
    """Grids passed to an operation do not share dimensions or transform."""


class FlowCycleError(ToolkitError):
    """The flow-direction graph contains a cycle."""

    def __init__(self, cycle: list[tuple[int, int]]):
        self.cycle = cycle
        path = " -> ".join(f"({r},{c})" for r, c in cycle)
        super().__init__(f"flow-direction cycle detected: {path}")


class UnfilledPitError(ToolkitError):
    """An interior cell has no lower neighbor; the DEM was not depression-filled."""


class IsolatedRegionError(ToolkitError):
    """A valid region is sealed off by nodata and cannot drain to the grid edge."""


class ExtentMismatchError(ToolkitError):
    """Two datasets that must overlap in world coordinates do not."""


class RegionError(ToolkitError):
    """A polygon region cannot be rasterized or scored on the given grid."""


class SimulationUnstableError(ToolkitError):
    """The flow solver produced non-finite depth or discharge.

    Carries the last consistent state so the failure can be inspected.
    """

    def __init__(self, message: str, state=None):
        self.state = state
        super().__init__(message)
