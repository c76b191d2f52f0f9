"""Grid container, ASCII round trips, and false-color rendering."""

import numpy as np
import pytest

from pampaflow import (GeoTransform, Grid, GridFormatError, read_ascii_grid,
                       render_falsecolor, write_ascii_grid)

from conftest import NODATA


def grid_from(values, cell_size=0.4, nodata=NODATA):
    arr = np.asarray(values, dtype=np.float64)
    return Grid(arr.shape[1], arr.shape[0], GeoTransform(0.0, 0.0, cell_size),
                arr, nodata)


class TestReadWrite:
    def test_direct_parse(self, tmp_path):
        path = tmp_path / "g.asc"
        path.write_text("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\n"
                        "cellsize 0.4\nNODATA_value -9999\n1.0 2.0\n")
        grid = read_ascii_grid(path)
        assert (grid.width, grid.height) == (2, 1)
        assert grid.values.tolist() == [[1.0, 2.0]]
        assert grid.cell_size == 0.4

    def test_nodata_sentinel_passthrough(self, tmp_path):
        path = tmp_path / "g.asc"
        path.write_text("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\n"
                        "cellsize 0.4\nNODATA_value -9999\n-9999 2.0\n")
        grid = read_ascii_grid(path)
        assert not grid.valid_mask[0, 0]
        assert grid.valid_mask[0, 1]

    def test_token_count_mismatch(self, tmp_path):
        path = tmp_path / "g.asc"
        path.write_text("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\n"
                        "cellsize 0.4\nNODATA_value -9999\n1.0 2.0 3.0\n")
        with pytest.raises(GridFormatError, match="token count mismatch"):
            read_ascii_grid(path)

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "g.asc"
        path.write_text("ncols 2\nxllcorner 0\nnrows 1\nyllcorner 0\n"
                        "cellsize 0.4\nNODATA_value -9999\n1 2\n")
        with pytest.raises(GridFormatError, match="malformed header"):
            read_ascii_grid(path)

    def test_non_numeric_token(self, tmp_path):
        path = tmp_path / "g.asc"
        path.write_text("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\n"
                        "cellsize 0.4\nNODATA_value -9999\n1.0 abc\n")
        with pytest.raises(GridFormatError, match="non-numeric token"):
            read_ascii_grid(path)

    def test_round_trip_identity(self, tmp_path):
        grid = grid_from([[1.0, 0.1 + 0.2], [-3.75, 12345.678912345]])
        path = tmp_path / "g.asc"
        write_ascii_grid(grid, path)
        assert read_ascii_grid(path).equals(grid)

    def test_round_trip_random(self, tmp_path, rng):
        for trial in range(25):
            h, w = int(rng.integers(1, 9)), int(rng.integers(1, 9))
            vals = rng.uniform(-1e6, 1e6, (h, w)) * 10.0 ** rng.integers(-8, 8)
            vals[rng.random((h, w)) < 0.2] = NODATA
            grid = grid_from(vals, cell_size=float(rng.uniform(0.05, 9.0)))
            path = tmp_path / f"g{trial}.asc"
            write_ascii_grid(grid, path)
            assert read_ascii_grid(path).equals(grid)

    def test_nodata_written_at_position(self, tmp_path):
        grid = grid_from([[1.0, NODATA], [3.0, 4.0]])
        path = tmp_path / "g.asc"
        write_ascii_grid(grid, path)
        body = path.read_text().splitlines()[6:]
        assert body[0].split() == ["1", "-9999"]

    def test_single_zero_token(self, tmp_path):
        grid = grid_from([[0.0]])
        path = tmp_path / "g.asc"
        write_ascii_grid(grid, path)
        lines = path.read_text().splitlines()
        assert lines[6] == "0"
        assert len(lines) == 7


class TestGeoreference:
    def test_corner_cell_centers(self):
        grid = grid_from(np.zeros((3, 4)), cell_size=2.0)
        # row 0 is northernmost; origin is the lower-left corner
        assert grid.cell_center(0, 0) == (1.0, 5.0)
        assert grid.cell_center(0, 3) == (7.0, 5.0)
        assert grid.cell_center(2, 0) == (1.0, 1.0)
        assert grid.cell_center(2, 3) == (7.0, 1.0)

    def test_cell_at_inverts_cell_center(self):
        grid = grid_from(np.zeros((5, 7)), cell_size=0.4)
        for row, col in ((0, 0), (4, 6), (2, 3)):
            x, y = grid.cell_center(row, col)
            assert grid.cell_at(x, y) == (row, col)
        assert grid.cell_at(-1.0, 0.5) is None

    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            GeoTransform(0.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            Grid(2, 2, GeoTransform(0, 0, 1.0), [1.0, 2.0, 3.0])


def _read_ppm(path):
    data = path.read_bytes()
    assert data.startswith(b"P6\n")
    header, rest = data.split(b"255\n", 1)
    dims = header.split(b"\n")[1].split()
    w, h = int(dims[0]), int(dims[1])
    pixels = np.frombuffer(rest, dtype=np.uint8).reshape(h, w, 3)
    return w, h, pixels


class TestRenderFalsecolor:
    def test_all_below_threshold_is_reddish(self, tmp_path):
        grid = grid_from([[0.0, 10.0], [25.0, 49.0]])
        path = tmp_path / "img.ppm"
        render_falsecolor(grid, 50.0, path)
        w, h, px = _read_ppm(path)
        assert (w, h) == (2, 2)
        assert (px[:, :, 0] >= px[:, :, 1]).all()
        assert (px[:, :, 0] >= px[:, :, 2]).all()
        assert px[0, 0, 0] == 80  # ramp start at value 0

    def test_threshold_cell_is_pure_blue(self, tmp_path):
        grid = grid_from([[50.0, 10.0]])
        path = tmp_path / "img.ppm"
        render_falsecolor(grid, 50.0, path)
        _, _, px = _read_ppm(path)
        assert px[0, 0].tolist() == [0, 0, 255]

    def test_maximum_cell_is_white(self, tmp_path):
        grid = grid_from([[50.0, 100.0, 10.0]])
        path = tmp_path / "img.ppm"
        render_falsecolor(grid, 50.0, path)
        _, _, px = _read_ppm(path)
        assert px[0, 1].tolist() == [255, 255, 255]
        assert px[0, 0, 2] == 255

    def test_all_nodata_is_black(self, tmp_path):
        grid = grid_from(np.full((3, 3), NODATA))
        path = tmp_path / "img.ppm"
        render_falsecolor(grid, 5.0, path)
        w, h, px = _read_ppm(path)
        assert (w, h) == (3, 3)
        assert not px.any()

    def test_pixel_count_matches_grid(self, tmp_path, rng):
        grid = grid_from(rng.uniform(0, 100, (7, 11)))
        path = tmp_path / "img.ppm"
        render_falsecolor(grid, 30.0, path)
        w, h, px = _read_ppm(path)
        assert (w, h) == (11, 7)
        assert px.shape == (7, 11, 3)
