"""Flooding flow accumulation: spread semantics, invariants, oracle equality."""

import math

import numpy as np
import pytest

from pampaflow import (FloodSpreadConfig, GridShapeError,
                       flooding_flow_accumulation)
from pampaflow.raster import GeoTransform, Grid

from conftest import NODATA, random_dem
from oracles import floodspread_oracle


def make_grid(values, cell=0.4):
    arr = np.asarray(values, dtype=np.float64)
    return Grid(arr.shape[1], arr.shape[0], GeoTransform(0, 0, cell), arr, NODATA)


def test_config_defaults_and_validation():
    cfg = FloodSpreadConfig()
    assert cfg.kernel_size == 41
    assert cfg.rise == 0.10
    assert cfg.effective_sigma == pytest.approx(40 / 6)
    with pytest.raises(ValueError):
        FloodSpreadConfig(kernel_size=40)
    with pytest.raises(ValueError):
        FloodSpreadConfig(rise=0.0)
    with pytest.raises(ValueError):
        FloodSpreadConfig(sigma=-1.0)
    assert FloodSpreadConfig(kernel_size=1).effective_sigma == 1.0


def test_flat_dem_single_source_formula():
    n = 45
    dem = make_grid(np.zeros((n, n)))
    a = np.ones((n, n))
    a[22, 22] = 100.0
    out = flooding_flow_accumulation(dem, make_grid(a), FloodSpreadConfig())
    sigma = 20.0 / 3.0
    assert out.values[22, 22] == 100.0
    for d in (1, 3, 7, 15, 20):
        expect = 100.0 * math.exp(-d * d / (2.0 * sigma * sigma))
        assert out.values[22, 22 + d] == pytest.approx(max(1.0, expect), rel=1e-12)


def test_elevation_test_excludes_high_target():
    z = np.zeros((3, 3))
    z[1, 2] = 0.2  # 0.2 m above the neighboring channel center
    a = np.ones((3, 3))
    a[1, 1] = 50.0
    out = flooding_flow_accumulation(make_grid(z), make_grid(a),
                                     FloodSpreadConfig(kernel_size=3, rise=0.1, sigma=1.0))
    assert out.values[1, 2] == 1.0  # keeps only its own accumulation
    assert out.values[1, 0] == 50.0 * np.exp(np.float64(-1.0) / (2.0 * 1.0))


def test_strict_inequality_at_exact_rise():
    z = np.zeros((1, 2))
    z[0, 1] = 0.1  # exactly rise above the center: excluded by strict "<"
    a = np.array([[50.0, 1.0]])
    out = flooding_flow_accumulation(make_grid(z), make_grid(a),
                                     FloodSpreadConfig(kernel_size=3, rise=0.1))
    assert out.values[0, 1] == 1.0


def test_kernel_one_is_identity(rng):
    dem = random_dem(rng, 9, 9)
    acc = dem.new_like(np.where(dem.valid_mask, rng.uniform(1, 50, (9, 9)), NODATA))
    out = flooding_flow_accumulation(dem, acc, FloodSpreadConfig(kernel_size=1))
    assert np.array_equal(out.values, acc.values)


def test_dominance_and_rise_monotonicity(rng):
    for _ in range(8):
        dem = random_dem(rng, 16, 16)
        acc = dem.new_like(np.where(dem.valid_mask,
                                    rng.uniform(1, 300, (16, 16)), NODATA))
        lo = flooding_flow_accumulation(dem, acc, FloodSpreadConfig(9, rise=0.05))
        hi = flooding_flow_accumulation(dem, acc, FloodSpreadConfig(9, rise=0.15))
        v = dem.valid_mask
        assert (lo.values[v] >= acc.values[v]).all()
        assert (hi.values[v] >= lo.values[v]).all()


def test_radial_decay_on_flat_dem():
    n = 45
    dem = make_grid(np.zeros((n, n)))
    a = np.ones((n, n))
    a[22, 22] = 100.0
    out = flooding_flow_accumulation(dem, make_grid(a), FloodSpreadConfig())
    cells = [(r, c) for r in range(n) for c in range(n)]
    dist = {cell: (cell[0] - 22) ** 2 + (cell[1] - 22) ** 2 for cell in cells}
    ordered = sorted(cells, key=lambda cell: dist[cell])
    for near, far in zip(ordered, ordered[1:]):
        if dist[near] < dist[far]:
            assert out.values[near] >= out.values[far]


def test_matches_direct_oracle_exactly(rng):
    for _ in range(6):
        dem = random_dem(rng, 16, 16)
        acc = dem.new_like(np.where(dem.valid_mask,
                                    rng.uniform(1, 500, (16, 16)), NODATA))
        cfg = FloodSpreadConfig(kernel_size=9, rise=0.1)
        out = flooding_flow_accumulation(dem, acc, cfg)
        assert np.array_equal(out.values, floodspread_oracle(dem, acc, cfg))


def test_dimension_mismatch_rejected(rng):
    dem = make_grid(np.zeros((4, 4)))
    acc = make_grid(np.ones((4, 5)))
    with pytest.raises(GridShapeError):
        flooding_flow_accumulation(dem, acc, FloodSpreadConfig(kernel_size=3))
