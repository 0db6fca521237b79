import numpy as np
import pytest

from covlqr import dataio
from covlqr.errors import ConfigError
from covlqr.lti import LtiSystem, NoiseSpec, simulate_and_collect


def test_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    sys = LtiSystem(a=0.4 * rng.standard_normal((3, 3)), b=rng.standard_normal((3, 2)))
    rec = simulate_and_collect(sys, NoiseSpec(1.0, 0.2, 11), 1.0, 17)
    csv_path = tmp_path / "data.csv"
    meta_path = tmp_path / "data.json"
    dataio.write_record(rec, csv_path, meta_path, {"seed": 11})
    loaded, meta = dataio.read_record(csv_path, meta_path)
    assert np.array_equal(loaded.u0, rec.u0)
    assert np.array_equal(loaded.x0, rec.x0)
    assert np.array_equal(loaded.x1, rec.x1)
    assert loaded.w0 is None  # noise never persists in files
    assert meta["T"] == 17 and meta["n"] == 3 and meta["m"] == 2 and meta["seed"] == 11


def test_column_layout():
    assert dataio.data_columns(2, 3) == [
        "u1", "u2", "x1", "x2", "x3", "x_next1", "x_next2", "x_next3"]


def test_missing_file_raises():
    with pytest.raises(ConfigError):
        dataio.read_record("/nonexistent/data.csv")


def test_bad_header_raises(tmp_path):
    path = tmp_path / "odd.csv"
    path.write_text("a,b,c\n1,2,3\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        dataio.read_record(path)


def test_float_format_17_digits():
    val = 0.1 + 0.2
    assert float(dataio.format_float(val)) == val
    assert dataio.format_float(float("inf")) == "inf"
    assert dataio.format_float(float("nan")) == "nan"


def test_lf_line_endings(tmp_path):
    path = tmp_path / "rows.csv"
    dataio.write_csv(path, ["a", "b"], [[1.0, 2.0]])
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.decode().splitlines()[0] == "a,b"
