import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hexport.errors import (
    CountMismatchError,
    DegenerateRangeWarning,
    MalformedHeaderError,
    NonNumericTokenError,
)
from hexport.grid_io import (
    HexRaster,
    RectRaster,
    parse_esri_ascii,
    read_hex_raster,
    render,
    write_esri_ascii,
    write_hex_raster,
)

MINIMAL = "ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 10\n1 2\n"


class TestParseEsri:
    def test_minimal_file(self):
        r = parse_esri_ascii(MINIMAL)
        assert (r.ncols, r.nrows) == (2, 1)
        assert (r.xll, r.yll, r.cellsize) == (0.0, 0.0, 10.0)
        assert r.nodata == -9999.0
        assert list(r.values.ravel()) == [1.0, 2.0]

    def test_count_mismatch(self):
        with pytest.raises(CountMismatchError):
            parse_esri_ascii(MINIMAL.replace("1 2\n", "1\n"))

    def test_nodata_passthrough(self):
        text = MINIMAL.replace("cellsize 10\n", "cellsize 10\nNODATA_value -9999\n")
        r = parse_esri_ascii(text.replace("1 2", "-9999 5"))
        assert r.nodata == -9999.0
        assert list(r.values.ravel()) == [-9999.0, 5.0]

    def test_missing_key(self):
        with pytest.raises(MalformedHeaderError):
            parse_esri_ascii("ncols 2\nnrows 1\nxllcorner 0\ncellsize 10\n1 2\n")

    def test_duplicate_key(self):
        with pytest.raises(MalformedHeaderError):
            parse_esri_ascii("ncols 2\nncols 2\n" + MINIMAL.split("\n", 1)[1])

    def test_non_numeric_token(self):
        with pytest.raises(NonNumericTokenError):
            parse_esri_ascii(MINIMAL.replace("1 2", "1 abc"))

    def test_xllcenter_converts_to_corner(self):
        text = MINIMAL.replace("xllcorner 0", "xllcenter 5")
        r = parse_esri_ascii(text)
        assert r.xll == 0.0

    def test_crlf_and_whitespace_runs(self):
        text = "ncols  2\r\nnrows\t1\r\nxllcorner 0\r\nyllcorner 0\r\ncellsize 10\r\n 1   2 \r\n"
        r = parse_esri_ascii(text)
        assert list(r.values.ravel()) == [1.0, 2.0]

    def test_bytes_accepted(self):
        assert parse_esri_ascii(MINIMAL.encode()) == parse_esri_ascii(MINIMAL)

    def test_case_insensitive_keys(self):
        text = MINIMAL.replace("ncols", "NCOLS").replace("xllcorner", "XLLCORNER")
        assert parse_esri_ascii(text).ncols == 2


class TestWriteEsri:
    def test_round_trip_minimal(self):
        r = parse_esri_ascii(MINIMAL)
        assert parse_esri_ascii(write_esri_ascii(r)) == r

    def test_tenth_survives(self):
        r = RectRaster(values=[[0.1]], xll=0.0, yll=0.0, cellsize=1.0)
        back = parse_esri_ascii(write_esri_ascii(r))
        assert back.values[0, 0] == 0.1

    def test_writing_always_succeeds_for_valid_input(self):
        r = RectRaster(values=[[1e-300, 1e300]], xll=-1e9, yll=1e9, cellsize=1e-9)
        text = write_esri_ascii(r)
        assert parse_esri_ascii(text) == r


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=60, deadline=None)
@given(
    ncols=st.integers(1, 5),
    nrows=st.integers(1, 5),
    xll=finite.filter(lambda v: abs(v) < 1e12),
    yll=finite.filter(lambda v: abs(v) < 1e12),
    cellsize=st.floats(1e-6, 1e6, allow_nan=False),
    data=st.data(),
)
def test_esri_round_trip_property(ncols, nrows, xll, yll, cellsize, data):
    vals = data.draw(
        st.lists(finite, min_size=ncols * nrows, max_size=ncols * nrows)
    )
    r = RectRaster(
        values=np.array(vals).reshape(nrows, ncols),
        xll=xll,
        yll=yll,
        cellsize=cellsize,
    )
    assert parse_esri_ascii(write_esri_ascii(r)) == r


@settings(max_examples=40, deadline=None)
@given(
    ncols=st.integers(1, 4),
    nrows=st.integers(1, 4),
    r=st.floats(1e-6, 1e6, allow_nan=False),
    data=st.data(),
)
def test_hex_round_trip_property(ncols, nrows, r, data):
    vals = data.draw(st.lists(finite, min_size=ncols * nrows, max_size=ncols * nrows))
    hx = HexRaster(
        values=np.array(vals).reshape(nrows, ncols), x0=0.5, y0=-0.25, r=r
    )
    assert read_hex_raster(write_hex_raster(hx)) == hx


class TestHexFormat:
    def test_single_cell_round_trip(self):
        hx = HexRaster(values=[[7.0]], x0=0.0, y0=0.0, r=1.0)
        assert read_hex_raster(write_hex_raster(hx)) == hx

    def test_count_mismatch(self):
        text = (
            "ncols 2\nnrows 2\nxcenter0 0\nycenter0 0\nradius 1\nNODATA_value -9999\n1 2 3\n"
        )
        with pytest.raises(CountMismatchError):
            read_hex_raster(text)

    def test_nodata_cells_round_trip(self):
        hx = HexRaster(values=[[-9999.0, 3.0]], x0=0.0, y0=0.0, r=1.0)
        back = read_hex_raster(write_hex_raster(hx))
        assert back.values[0, 0] == -9999.0

    def test_missing_header(self):
        with pytest.raises(MalformedHeaderError):
            read_hex_raster("ncols 1\nnrows 1\nradius 1\nNODATA_value -9999\n1\n")


class TestRender:
    def test_single_hex_svg_has_one_polygon(self):
        hx = HexRaster(values=[[1.0]], x0=0.0, y0=0.0, r=1.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateRangeWarning)
            svg = render(hx, "svg").decode()
        assert svg.count("<polygon") == 1
        pts = svg.split('points="')[1].split('"')[0]
        assert len(pts.split()) == 6

    def test_rect_ppm_dimensions_and_blocks(self):
        r = RectRaster(values=[[0.0, 1.0], [2.0, 3.0]], xll=0, yll=0, cellsize=1.0)
        ppm = render(r, "ppm", px_per_cell=4)
        header, rest = ppm.split(b"\n", 1)
        assert header == b"P6"
        dims, rest = rest.split(b"\n", 1)
        assert dims == b"8 8"
        _, pixels = rest.split(b"\n", 1)
        img = np.frombuffer(pixels, dtype=np.uint8).reshape(8, 8, 3)
        colors = {tuple(img[i, j]) for i in range(8) for j in range(8)}
        assert len(colors) == 4
        # each block uniform
        for bi in range(2):
            for bj in range(2):
                block = img[bi * 4 : bi * 4 + 4, bj * 4 : bj * 4 + 4]
                assert len({tuple(p) for p in block.reshape(-1, 3)}) == 1

    def test_constant_raster_warns_not_errors(self):
        r = RectRaster(values=[[5.0, 5.0]], xll=0, yll=0, cellsize=1.0)
        with pytest.warns(DegenerateRangeWarning):
            ppm = render(r, "ppm", px_per_cell=2)
        _, _, _, pixels = ppm.split(b"\n", 3)
        img = np.frombuffer(pixels, dtype=np.uint8).reshape(-1, 3)
        assert len({tuple(p) for p in img}) == 1

    def test_explicit_range_suppresses_warning(self):
        r = RectRaster(values=[[5.0, 5.0]], xll=0, yll=0, cellsize=1.0)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            render(r, "ppm", value_range=(0.0, 10.0))

    def test_hex_svg_cell_count(self):
        hx = HexRaster(values=np.arange(6.0).reshape(2, 3), x0=0.0, y0=0.0, r=1.0)
        svg = render(hx, "svg").decode()
        assert svg.count("<polygon") == 6

    def test_rect_svg_cell_count(self):
        r = RectRaster(values=np.arange(12.0).reshape(3, 4), xll=0, yll=0, cellsize=2.0)
        svg = render(r, "svg").decode()
        assert svg.count("<rect") == 12

    def test_nodata_gets_gap_color(self):
        r = RectRaster(values=[[-9999.0, 1.0], [2.0, 3.0]], xll=0, yll=0, cellsize=1.0)
        ppm = render(r, "ppm", px_per_cell=1)
        _, _, _, pixels = ppm.split(b"\n", 3)
        img = np.frombuffer(pixels, dtype=np.uint8).reshape(2, 2, 3)
        assert tuple(img[0, 0]) == (200, 200, 200)

    def test_hex_ppm_smoke(self):
        hx = HexRaster(values=np.arange(12.0).reshape(3, 4), x0=0.0, y0=0.0, r=1.0)
        ppm = render(hx, "ppm", px_per_cell=6)
        assert ppm.startswith(b"P6\n")
