import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasisl import load_problem, parse_problem
from quasisl.coefficients import Polynomial
from quasisl.errors import NonPositiveCoefficient, ProblemFileError
from quasisl.problem_file import parse_number

STEP = """
[interval]
a = 0
b = 1

[coefficients]
s = [
  { from = 0,   to = 0.5, kind = "constant", params = { value = 0 } },
  { from = 0.5, to = 1,   kind = "constant", params = { value = 1 } },
]
q = [
  { from = 0,   to = 0.5, kind = "constant", params = { value = 0 } },
  { from = 0.5, to = 1,   kind = "constant", params = { value = -1 } },
]
"""


def test_parse_number():
    assert parse_number("pi/2") == math.pi / 2
    assert parse_number("-inf") == -math.inf
    assert parse_number(3) == 3.0
    assert parse_number("2*e**2") == pytest.approx(2 * math.e**2)
    for bad in ("__import__('os')", "x", "1/0", True, [1]):
        with pytest.raises(ProblemFileError):
            parse_number(bad)


def test_defaults():
    prob = parse_problem({"interval": {"a": 0, "b": "pi"}})
    assert prob.b == math.pi
    assert (prob.p(1.0), prob.q(1.0), prob.r(1.0), prob.s(1.0)) == (1.0, 0.0, 1.0, 0.0)


def test_step_file(tmp_path):
    path = tmp_path / "step.toml"
    path.write_text(STEP)
    prob = load_problem(path)
    assert prob.breakpoints() == (0.5,)
    assert prob.s(0.75) == 1.0 and prob.q(0.25) == 0.0


def test_terms():
    doc = {
        "interval": {"a": 0, "b": 1},
        "coefficients": {
            "p": [{"from": 0, "to": 1, "kind": "polynomial", "params": {"coeffs": [1, 1]}}],
            "q": [
                {
                    "from": 0,
                    "to": 1,
                    "kind": "sum",
                    "params": {
                        "terms": [
                            {"kind": "sin", "params": {"scale": 1, "freq": 1, "phase": 0}},
                            {"kind": "exp", "params": {"scale": 2, "rate": -1}},
                        ]
                    },
                }
            ],
        },
    }
    prob = parse_problem(doc)
    assert prob.p.term_at(0.5) == Polynomial((1.0, 1.0))
    assert prob.q(0.3) == pytest.approx(math.sin(0.3) + 2 * math.exp(-0.3))


@pytest.mark.parametrize(
    "doc",
    [
        {},
        {"interval": {"a": 0}},
        {"interval": {"a": 0, "b": 1}, "extra": {}},
        {"interval": {"a": 0, "b": 1}, "coefficients": {"w": 1}},
        {"interval": {"a": 0, "b": 1}, "coefficients": {"q": [{"from": 0, "to": 1, "kind": "tan", "params": {}}]}},
        {"interval": {"a": 0, "b": 1}, "coefficients": {"q": [{"from": 0, "to": 1, "kind": "constant", "params": {"v": 1}}]}},
        {"interval": {"a": 0, "b": 1}, "coefficients": {"q": []}},
    ],
)
def test_rejects_malformed(doc):
    with pytest.raises(ProblemFileError):
        parse_problem(doc)


def test_validation_runs():
    with pytest.raises(NonPositiveCoefficient):
        parse_problem({"interval": {"a": 0, "b": 1}, "coefficients": {"p": -1}})


def test_unreadable(tmp_path):
    with pytest.raises(ProblemFileError):
        load_problem(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("[interval\n")
    with pytest.raises(ProblemFileError):
        load_problem(bad)


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_number_roundtrip(x):
    assert parse_number(repr(x)) == x
