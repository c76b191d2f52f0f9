"""Flash-flood screening layer: flow accumulation spread over a windowed
neighborhood under a water-rise elevation test, aggregated by maximum.

Each cell broadcasts its accumulation to every cell of a square window
around it, damped by a Gaussian of the center-to-center distance in cells,
but only onto targets lying less than `rise` meters above it.  A target
keeps the maximum offer it receives; its own accumulation (weight 1 at
distance 0) is always among the offers, so the output dominates the input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridShapeError
from .raster import Grid


@dataclass(frozen=True)
class FloodSpreadConfig:
    """Window size, water-rise test height, and Gaussian width (in cells).

    sigma defaults to (kernel_size - 1) / 6 so the weight decays to about
    one percent at the window edge; with a 1-cell window the Gaussian is
    never evaluated off-center and sigma falls back to 1.
    """

    kernel_size: int = 41
    rise: float = 0.10
    sigma: float | None = None

    def __post_init__(self):
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ValueError("kernel_size must be odd and >= 1")
        if not (self.rise > 0):
            raise ValueError("rise must be > 0")
        if self.sigma is not None and not (self.sigma > 0):
            raise ValueError("sigma must be > 0")

    @property
    def effective_sigma(self) -> float:
        if self.sigma is not None:
            return self.sigma
        if self.kernel_size == 1:
            return 1.0
        return (self.kernel_size - 1) / 6.0


def gaussian_kernel(kernel_size: int, sigma: float) -> np.ndarray:
    """(k, k) weights exp(-(dr^2 + dc^2) / (2 sigma^2)); center weight is 1."""
    radius = (kernel_size - 1) // 2
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    d2 = offsets[:, None] ** 2 + offsets[None, :] ** 2
    return np.exp(-d2 / (2.0 * sigma * sigma))


def flooding_flow_accumulation(dem: Grid, accum: Grid,
                               config: FloodSpreadConfig | None = None) -> Grid:
    """Maximum-aggregated spread of accumulation under the elevation test.

    out(p) = max over centers c whose window covers p, with
    elev(p) < elev(c) + rise, of accum(c) * w(distance(c, p)); the center
    itself always passes, so out(p) >= accum(p).  Nodata cells neither give
    nor receive.
    """
    if config is None:
        config = FloodSpreadConfig()
    if (dem.width, dem.height) != (accum.width, accum.height) \
            or dem.transform != accum.transform:
        raise GridShapeError("dem and accumulation grids must share shape and transform")

    valid = dem.valid_mask & accum.valid_mask
    z = dem.values
    a = accum.values
    h, w = z.shape
    radius = (config.kernel_size - 1) // 2
    rise = config.rise
    weights = gaussian_kernel(config.kernel_size, config.effective_sigma)

    out = np.where(valid, a, -np.inf)

    for dr in range(-radius, radius + 1):
        for dc in range(-radius, radius + 1):
            if dr == 0 and dc == 0:
                continue
            wgt = weights[dr + radius, dc + radius]
            # center block (r, c) offers to target block (r + dr, c + dc)
            cr0, cr1 = max(-dr, 0), h - max(dr, 0)
            cc0, cc1 = max(-dc, 0), w - max(dc, 0)
            if cr0 >= cr1 or cc0 >= cc1:
                continue
            tr0, tr1 = cr0 + dr, cr1 + dr
            tc0, tc1 = cc0 + dc, cc1 + dc

            zc = z[cr0:cr1, cc0:cc1]
            zt = z[tr0:tr1, tc0:tc1]
            ok = (valid[cr0:cr1, cc0:cc1] & valid[tr0:tr1, tc0:tc1]
                  & (zt < zc + rise))
            offer = a[cr0:cr1, cc0:cc1] * wgt
            tgt = out[tr0:tr1, tc0:tc1]
            np.maximum(tgt, np.where(ok, offer, -np.inf), out=tgt)

    values = np.where(valid, out, dem.nodata)
    return Grid(w, h, dem.transform, values, dem.nodata)
