"""Point gridding, block-minimum aggregation, and hole filling."""

import numpy as np
import pytest

from pampaflow import (BoundingBox, DemBuildConfig, PointCloud, ToolkitError,
                       aggregate_min, build_dem, fill_nodata_linear,
                       rasterize_points, read_xyz, write_xyz)
from pampaflow.raster import GeoTransform, Grid

from conftest import NODATA


def cfg(extent=(0.0, 0.0, 1.0, 1.0), res=0.1, factor=4):
    return DemBuildConfig(extent=BoundingBox(*extent), fine_resolution=res,
                          aggregate_factor=factor, nodata=NODATA)


class TestRasterizePoints:
    def test_single_point_placement(self):
        grid = rasterize_points(PointCloud([(0.05, 0.05, 100.0)]), cfg())
        assert (grid.width, grid.height) == (10, 10)
        assert grid.values[9, 0] == 100.0
        mask = grid.valid_mask
        mask[9, 0] = False
        assert not mask.any()

    def test_minimum_of_shared_cell(self):
        cloud = PointCloud([(0.05, 0.05, 100.0), (0.07, 0.02, 99.0)])
        grid = rasterize_points(cloud, cfg())
        assert grid.values[9, 0] == 99.0

    def test_points_outside_extent_dropped(self):
        cloud = PointCloud([(1.5, 0.5, 7.0), (-0.1, 0.5, 7.0), (0.5, 1.0, 7.0)])
        grid = rasterize_points(cloud, cfg())
        assert not grid.valid_mask.any()

    def test_matches_group_by_minimum_oracle(self, rng):
        pts = np.column_stack([rng.uniform(0, 1, 1000), rng.uniform(0, 1, 1000),
                               rng.uniform(50, 150, 1000)])
        grid = rasterize_points(PointCloud(pts), cfg())
        best: dict[tuple[int, int], float] = {}
        for x, y, z in pts:
            col = int(x / 0.1)
            row = 9 - int(y / 0.1)
            key = (row, col)
            best[key] = min(best.get(key, np.inf), z)
        for (row, col), z in best.items():
            assert grid.values[row, col] == z
        assert int(grid.valid_mask.sum()) == len(best)


class TestAggregateMin:
    def test_global_minimum_single_block(self, rng):
        vals = rng.permutation(16).astype(float).reshape(4, 4)
        grid = Grid(4, 4, GeoTransform(0, 0, 0.1), vals, NODATA)
        out = aggregate_min(grid, 4)
        assert (out.width, out.height) == (1, 1)
        assert out.values[0, 0] == 0.0
        assert out.cell_size == pytest.approx(0.4)

    def test_nodata_ignored_in_block(self):
        vals = np.array([[NODATA, NODATA], [5.0, 7.0]])
        grid = Grid(2, 2, GeoTransform(0, 0, 1.0), vals, NODATA)
        out = aggregate_min(grid, 2)
        assert out.values[0, 0] == 5.0

    def test_all_nodata_block_stays_nodata(self):
        vals = np.full((2, 2), NODATA)
        grid = Grid(2, 2, GeoTransform(0, 0, 1.0), vals, NODATA)
        out = aggregate_min(grid, 2)
        assert not out.valid_mask.any()

    def test_matches_nested_loop_oracle(self, rng):
        vals = rng.uniform(0, 100, (16, 16))
        vals[rng.random((16, 16)) < 0.3] = NODATA
        grid = Grid(16, 16, GeoTransform(0, 0, 1.0), vals, NODATA)
        out = aggregate_min(grid, 4)
        for br in range(4):
            for bc in range(4):
                block = vals[br * 4:(br + 1) * 4, bc * 4:(bc + 1) * 4]
                live = block[block != NODATA]
                expect = live.min() if live.size else NODATA
                assert out.values[br, bc] == expect

    def test_ragged_trailing_blocks(self, rng):
        vals = rng.uniform(0, 100, (5, 7))
        grid = Grid(7, 5, GeoTransform(0, 0, 1.0), vals, NODATA)
        out = aggregate_min(grid, 3)
        assert (out.height, out.width) == (2, 3)
        assert out.values[1, 2] == vals[3:5, 6:7].min()


class TestFillNodataLinear:
    def test_row_midpoint(self):
        grid = Grid(3, 1, GeoTransform(0, 0, 1.0), [1.0, NODATA, 3.0], NODATA)
        out = fill_nodata_linear(grid)
        assert out.values.tolist() == [[1.0, 2.0, 3.0]]

    def test_row_linear_ramp(self):
        grid = Grid(4, 1, GeoTransform(0, 0, 1.0), [1.0, NODATA, NODATA, 4.0], NODATA)
        out = fill_nodata_linear(grid)
        assert out.values[0] == pytest.approx([1.0, 2.0, 3.0, 4.0])

    def test_column_fallback_midpoint(self):
        vals = np.full((3, 3), NODATA)
        vals[0, 1] = 2.0
        vals[2, 1] = 6.0
        vals[0, 0] = vals[2, 0] = vals[0, 2] = vals[2, 2] = 1.0
        grid = Grid(3, 3, GeoTransform(0, 0, 1.0), vals, NODATA)
        out = fill_nodata_linear(grid)
        assert out.values[1, 1] == pytest.approx(4.0)

    def test_nearest_copy_tie_break(self):
        vals = np.full((2, 2), NODATA)
        vals[0, 1] = 8.0
        vals[1, 0] = 3.0
        grid = Grid(2, 2, GeoTransform(0, 0, 1.0), vals, NODATA)
        out = fill_nodata_linear(grid)
        # (0,0) ties between (0,1) and (1,0); the smaller row wins
        assert out.values[0, 0] == 8.0
        assert out.values[1, 1] == 8.0

    def test_valid_cells_unchanged_and_idempotent(self, rng):
        vals = rng.uniform(0, 50, (8, 8))
        holes = rng.random((8, 8)) < 0.35
        vals[holes] = NODATA
        grid = Grid(8, 8, GeoTransform(0, 0, 1.0), vals, NODATA)
        out = fill_nodata_linear(grid)
        assert np.array_equal(out.values[~holes], vals[~holes])
        assert out.valid_mask.all()
        again = fill_nodata_linear(out)
        assert np.array_equal(again.values, out.values)

    def test_all_nodata_is_error(self):
        grid = Grid(2, 2, GeoTransform(0, 0, 1.0), np.full((2, 2), NODATA), NODATA)
        with pytest.raises(ToolkitError):
            fill_nodata_linear(grid)


class TestChainProperties:
    def test_fine_aggregate_equals_direct_coarse(self, rng):
        # with >= 1 point per fine cell, min is associative over the partition
        pts = []
        for row_s in range(8):
            for col in range(8):
                for _ in range(3):
                    pts.append((col * 0.1 + rng.uniform(0, 0.1),
                                row_s * 0.1 + rng.uniform(0, 0.1),
                                rng.uniform(0, 30)))
        cloud = PointCloud(pts)
        fine_cfg = cfg(extent=(0, 0, 0.8, 0.8), res=0.1, factor=2)
        via_aggregate = aggregate_min(rasterize_points(cloud, fine_cfg), 2)
        direct = rasterize_points(cloud, cfg(extent=(0, 0, 0.8, 0.8), res=0.2))
        assert np.array_equal(via_aggregate.values, direct.values)
        assert via_aggregate.transform == direct.transform

    def test_full_chain_has_no_nodata(self, rng):
        pts = [(rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 5))
               for _ in range(120)]
        grid = build_dem(PointCloud(pts), cfg(extent=(0, 0, 2, 2), res=0.1, factor=4))
        assert grid.valid_mask.all()


class TestXyzIO:
    def test_round_trip_and_comments(self, tmp_path):
        path = tmp_path / "pts.xyz"
        path.write_text("# comment\n1.5 2.5 10.0\n\n3.5 4.5 -2.25\n")
        cloud = read_xyz(path)
        assert len(cloud) == 2
        assert cloud.points[1].tolist() == [3.5, 4.5, -2.25]
        out = tmp_path / "out.xyz"
        write_xyz(cloud, out)
        assert np.array_equal(read_xyz(out).points, cloud.points)

    def test_bad_triple_rejected(self, tmp_path):
        path = tmp_path / "pts.xyz"
        path.write_text("1.0 2.0\n")
        with pytest.raises(ToolkitError):
            read_xyz(path)
