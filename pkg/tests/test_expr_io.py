import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hjlab.expr import ExpressionError, NonPeriodicWarning, parse_expression, parse_source_expression
from hjlab.io import dump_json, read_field, to_jsonable, write_csv, write_field, write_field_csv
from hjlab.torus import Field2D, grid_coordinates

from .conftest import PI, bandlimited, field


def test_zero_expression():
    f = parse_source_expression("0", 16)
    assert f.max_abs() == 0.0 and f.n == 16


def test_matches_direct_construction():
    f = parse_source_expression("cos(2*pi*x)*cos(2*pi*y)", 32)
    direct = field(lambda x, y: np.cos(2 * PI * x) * np.cos(2 * PI * y), n=32)
    assert np.array_equal(f.values, direct.values)


def test_trig_identity():
    f = parse_source_expression("sin(2*pi*x)^2", 64)
    g = field(lambda x, y: (1 - np.cos(4 * PI * x)) / 2)
    assert np.max(np.abs(f.values - g.values)) <= 1e-14


@pytest.mark.parametrize(
    "text,value",
    [
        ("1 + 2 * 3", 7.0),
        ("(1 + 2) * 3", 9.0),
        ("2 ^ 3 ^ 2", 512.0),
        ("-2 ^ 2", -4.0),
        ("2 ^ -1", 0.5),
        ("8 / 4 / 2", 1.0),
        ("1 - 2 - 3", -4.0),
        ("--3", 3.0),
        ("+3 * -2", -6.0),
        ("1.5e1 + .5", 15.5),
        ("exp(0) + cos(pi)", 0.0),
        ("2 * pi", 2 * math.pi),
    ],
)
def test_precedence(text, value):
    assert parse_expression(text)(0.0, 0.0) == pytest.approx(value, rel=1e-15)


def test_variables():
    e = parse_expression("x - 2*y")
    assert e(3.0, 1.0) == 1.0


@pytest.mark.parametrize(
    "text,pos",
    [
        ("1 +", 3),
        ("sin 1", 4),
        ("(1 + 2", 6),
        ("1 + z", 4),
        ("2 $ 3", 2),
        ("1 2", 2),
        ("tan(x)", 0),
        ("", 0),
    ],
)
def test_syntax_errors_report_position(text, pos):
    with pytest.raises(ExpressionError) as info:
        parse_expression(text)
    assert info.value.position == pos
    assert f"position {pos}" in str(info.value)


def test_non_periodic_expression_is_flagged():
    with pytest.warns(NonPeriodicWarning):
        f = parse_source_expression("x", 16)
    x, _ = grid_coordinates(16)
    np.testing.assert_array_equal(f.values, np.broadcast_to(x, (16, 16)))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        parse_source_expression("sin(2*pi*x) + exp(cos(2*pi*y))", 16)


def test_period_aware_periodicity():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        parse_source_expression("cos(pi*x)", 16, period=2.0)
    with pytest.warns(NonPeriodicWarning):
        parse_source_expression("cos(pi*x)", 16, period=1.0)


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-5, 5), b=st.floats(-5, 5), c=st.floats(0.1, 5))
def test_arithmetic_agrees_with_python(a, b, c):
    text = f"({a!r}) + ({b!r}) * ({c!r}) - ({a!r}) / ({c!r})"
    assert parse_expression(text)(0.0, 0.0) == pytest.approx(a + b * c - a / c, rel=1e-12, abs=1e-12)


def test_field_round_trip(tmp_path):
    f = bandlimited(16, 3, period=2.5)
    write_field(tmp_path / "f.txt", f)
    g = read_field(tmp_path / "f.txt")
    assert np.array_equal(f.values, g.values) and g.period == 2.5


def test_field_file_rejects_bad_shape(tmp_path):
    (tmp_path / "bad.txt").write_text("8 1.0\n1 2 3\n")
    with pytest.raises(ValueError):
        read_field(tmp_path / "bad.txt")
    (tmp_path / "bad2.txt").write_text("8\n")
    with pytest.raises(ValueError):
        read_field(tmp_path / "bad2.txt")


def test_field_csv(tmp_path):
    f = Field2D.from_function(lambda x, y: x + 10 * y, 8)
    write_field_csv(tmp_path / "f.csv", f)
    lines = (tmp_path / "f.csv").read_text().strip().split("\n")
    assert lines[0] == "x,y,value"
    assert len(lines) == 65
    assert lines[2] == "0.0,0.125,1.25"


def test_csv_and_json(tmp_path):
    write_csv(tmp_path / "t.csv", [{"a": 0.1, "b": "x"}, {"a": 2}], ["a", "b"])
    assert (tmp_path / "t.csv").read_text() == "a,b\n0.1,x\n2,\n"
    obj = {"inf": math.inf, "nan": float("nan"), "arr": np.arange(2), "np": np.float64(0.5), 3: np.bool_(True)}
    assert to_jsonable(obj) == {"inf": "inf", "nan": None, "arr": [0, 1], "np": 0.5, "3": True}
    text = dump_json(obj, tmp_path / "o.json")
    assert json.loads((tmp_path / "o.json").read_text()) == json.loads(text)
