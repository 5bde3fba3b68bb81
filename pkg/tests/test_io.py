"""Canonical serialization: floats at full precision, schema headers,
matrix JSON round trips, and error reports."""

import json

import numpy as np
import pytest

from traceshift.io import (
    canonical_json,
    error_report_json,
    format_float,
    matrix_to_json_obj,
    read_matrix_json,
    write_csv,
    write_json,
    write_matrix_json,
)
from traceshift.spectra import NumericalError, ValidationError


def test_format_float_full_precision():
    x = 1.0 / 3.0
    assert float(format_float(x)) == x
    assert format_float(0.0) == "0.0000000000000000e+00"
    with pytest.raises(ValidationError):
        format_float(float("nan"))
    with pytest.raises(ValidationError):
        format_float(float("inf"))


def test_canonical_json_stable_and_typed():
    obj = {"b": 1, "a": [True, 2, 0.5], "c": None, "s": "x"}
    text = canonical_json(obj)
    assert text == canonical_json({"b": 1, "a": [True, 2, 0.5], "c": None, "s": "x"})
    parsed = json.loads(text)
    assert parsed["a"][0] is True and parsed["a"][1] == 2
    assert "5.0000000000000000e-01" in text


def test_write_json_and_csv_schema(tmp_path):
    jpath = tmp_path / "r.json"
    write_json(str(jpath), {"schema": "traceshift/thing/v1", "x": 1.5})
    assert json.loads(jpath.read_text())["x"] == 1.5

    cpath = tmp_path / "r.csv"
    write_csv(str(cpath), "thing", ("a", "b"), [(1, 2.0), (3, 0.25)])
    lines = cpath.read_text().splitlines()
    assert lines[0] == "# schema=traceshift/thing/v1"
    assert lines[1] == "a,b"
    assert lines[3] == "3,2.5000000000000000e-01"


def test_matrix_json_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    m = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
    path = tmp_path / "m.json"
    write_matrix_json(str(path), m)
    back = read_matrix_json(str(path))
    assert np.array_equal(back, m)  # 17 significant digits round-trip exactly
    obj = matrix_to_json_obj(m)
    assert obj["rows"] == 3 and obj["cols"] == 5


def test_matrix_json_validation(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"rows": 2, "cols": 2, "re": [[1, 2]], "im": [[0, 0]]}')
    with pytest.raises(ValidationError):
        read_matrix_json(str(path))
    path.write_text('{"rows": 1, "cols": 1, "re": [[1]]}')
    with pytest.raises(ValidationError):
        read_matrix_json(str(path))
    path.write_text("not json")
    with pytest.raises(ValidationError):
        read_matrix_json(str(path))
    with pytest.raises(ValidationError):
        read_matrix_json(str(tmp_path / "missing.json"))


def test_error_report_shape():
    rep = json.loads(error_report_json(ValidationError("bad input")))
    assert rep["schema"] == "traceshift/error/v1"
    assert rep["error"] == "ValidationError"
    assert rep["message"] == "bad input"
    rep = json.loads(error_report_json(NumericalError("diverged")))
    assert rep["error"] == "NumericalError"
