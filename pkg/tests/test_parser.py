"""Tests for the path CSV parser."""

import logging

import numpy as np
import pytest

from fpcca.errors import DataError, GridMismatchError
from fpcca.models import FunctionalDataset, Grid
from fpcca.parser import DatasetParser

SAMPLE = """t,0.25,0.75
path_1,1.0,2.0
path_2,-0.5,3.25
path_3,0,1e-3
"""


def test_parse_text():
    ds = DatasetParser.parse_text(SAMPLE)
    assert (ds.n, ds.p) == (3, 2)
    np.testing.assert_array_equal(ds.grid.points, [0.25, 0.75])
    np.testing.assert_allclose(ds.grid.weights, [0.5, 0.5])
    np.testing.assert_array_equal(ds.values[1], [-0.5, 3.25])
    assert not ds.centered


def test_write_then_read_preserves_values(tmp_path):
    rng = np.random.default_rng(0)
    grid = Grid.midpoint(7)
    ds = FunctionalDataset(rng.standard_normal((4, 7)), grid)
    path = tmp_path / "x.csv"
    DatasetParser.write(ds, path)

    loaded = DatasetParser.read(path)
    np.testing.assert_array_equal(loaded.values, ds.values)
    assert loaded.grid.matches(grid)

    lines = path.read_text(encoding="utf-8").split("\n")
    assert lines[0].startswith("t,0.0714285714285714")
    assert lines[1].startswith("path_1,")
    assert lines[-1] == ""
    assert b"\r" not in path.read_bytes()


def test_header_must_start_with_t():
    with pytest.raises(DataError):
        DatasetParser.parse_text("s,0.25,0.75\npath_1,1,2\npath_2,3,4\n")


def test_non_numeric_value():
    with pytest.raises(DataError, match="line 3"):
        DatasetParser.parse_text("t,0.25,0.75\npath_1,1,2\npath_2,abc,4\n")
    with pytest.raises(DataError):
        DatasetParser.parse_text("t,0.25,0.75\npath_1,1,2\npath_2,nan,4\n")


def test_row_length_mismatch():
    with pytest.raises(GridMismatchError):
        DatasetParser.parse_text("t,0.25,0.75\npath_1,1,2\npath_2,3\n")


def test_empty_inputs():
    with pytest.raises(DataError, match="empty"):
        DatasetParser.parse_text("")
    with pytest.raises(DataError, match="no sample paths"):
        DatasetParser.parse_text("t,0.25,0.75\n")


def test_unexpected_row_label_warns(caplog):
    with caplog.at_level(logging.WARNING):
        ds = DatasetParser.parse_text("t,0.25,0.75\npath_1,1,2\nrow,3,4\n")
    assert ds.n == 2
    assert "unexpected label" in caplog.text


def test_read_missing_file(tmp_path):
    with pytest.raises(OSError):
        DatasetParser.read(tmp_path / "missing.csv")


def test_invalid_utf8_is_a_data_error(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_bytes(b"t,0.25,0.75\n\xff\xfe,1,2\npath_2,3,4\n")
    with pytest.raises(DataError, match="UTF-8") as excinfo:
        DatasetParser.read(path)
    assert isinstance(excinfo.value.__cause__, UnicodeDecodeError)
