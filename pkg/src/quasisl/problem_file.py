"""Problem-definition files.

A problem file is TOML with two sections::

    [interval]
    a = 0
    b = "pi"            # numbers, or strings such as "pi/2", "-inf", "2*pi"

    [coefficients]
    p = 1               # a number is a constant coefficient
    r = 1
    s = [
      { from = 0,   to = 0.5, kind = "constant", params = { value = 0 } },
      { from = 0.5, to = 1,   kind = "constant", params = { value = 1 } },
    ]
    q = [ { from = 0, to = 1, kind = "sin", params = { scale = 1, freq = 1, phase = 0 } } ]

Piece kinds and their params:

    constant    value
    polynomial  coeffs (ascending powers)
    power       scale, center, exponent      scale * |x - center|**exponent
    exp         scale, rate                  scale * exp(rate * x)
    sin, cos    scale, freq, phase           scale * sin(freq * x + phase)
    sum         terms = [ { kind, params }, ... ]

Pieces must be contiguous and cover [a, b].  Omitted coefficients default
to p = r = 1 and q = s = 0.  Unknown sections, keys, kinds and params are
errors.
"""

from __future__ import annotations

import ast
import math
import operator
import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .coefficients import (
    COEFFICIENT_NAMES,
    Coefficient,
    Constant,
    Cos,
    Exp,
    Interval,
    Piece,
    Polynomial,
    Power,
    Sin,
    SLProblem,
    Sum,
    Term,
    validate_problem,
)
from .errors import ProblemFileError

_NAMES = {"pi": math.pi, "e": math.e, "inf": math.inf}
_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def parse_number(value) -> float:
    """A float from a TOML number or an arithmetic string (named constants: pi e inf)."""
    if isinstance(value, bool):
        raise ProblemFileError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ProblemFileError(f"expected a number, got {value!r}")
    try:
        tree = ast.parse(value.strip(), mode="eval")
    except SyntaxError as exc:
        raise ProblemFileError(f"cannot parse number {value!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        raise ProblemFileError(f"unsupported expression in {value!r}")

    try:
        return float(ev(tree))
    except (ZeroDivisionError, OverflowError) as exc:
        raise ProblemFileError(f"cannot evaluate {value!r}: {exc}") from exc


_KINDS = {
    "constant": ({"value"}, lambda p: Constant(p["value"])),
    "polynomial": ({"coeffs"}, lambda p: Polynomial(tuple(p["coeffs"]))),
    "power": ({"scale", "center", "exponent"}, lambda p: Power(p["scale"], p["center"], p["exponent"])),
    "exp": ({"scale", "rate"}, lambda p: Exp(p["scale"], p["rate"])),
    "sin": ({"scale", "freq", "phase"}, lambda p: Sin(p["scale"], p["freq"], p["phase"])),
    "cos": ({"scale", "freq", "phase"}, lambda p: Cos(p["scale"], p["freq"], p["phase"])),
}


def _check_keys(where: str, got, allowed: set, required: set | None = None) -> None:
    if not isinstance(got, dict):
        raise ProblemFileError(f"{where}: expected a table")
    extra = set(got) - allowed
    if extra:
        raise ProblemFileError(f"{where}: unknown keys {sorted(extra)}")
    missing = (allowed if required is None else required) - set(got)
    if missing:
        raise ProblemFileError(f"{where}: missing keys {sorted(missing)}")


def parse_term(spec, where: str = "term") -> Term:
    _check_keys(where, spec, {"kind", "params"})
    kind = spec["kind"]
    params = spec["params"]
    if kind == "sum":
        _check_keys(f"{where}.params", params, {"terms"})
        terms = params["terms"]
        if not isinstance(terms, list) or not terms:
            raise ProblemFileError(f"{where}: sum needs a nonempty list of terms")
        return Sum(tuple(parse_term(t, f"{where}.terms[{i}]") for i, t in enumerate(terms)))
    if kind not in _KINDS:
        raise ProblemFileError(f"{where}: unknown kind {kind!r}")
    names, build = _KINDS[kind]
    _check_keys(f"{where}.params", params, names)
    if kind == "polynomial":
        coeffs = params["coeffs"]
        if not isinstance(coeffs, list) or not coeffs:
            raise ProblemFileError(f"{where}: polynomial needs a nonempty coeffs list")
        return build({"coeffs": [parse_number(c) for c in coeffs]})
    return build({k: parse_number(v) for k, v in params.items()})


def parse_coefficient(spec, name: str) -> Coefficient:
    if not isinstance(spec, list):
        return Coefficient.constant(parse_number(spec))
    if not spec:
        raise ProblemFileError(f"coefficient {name}: empty piece list")
    pieces = []
    for i, rec in enumerate(spec):
        where = f"coefficients.{name}[{i}]"
        _check_keys(where, rec, {"from", "to", "kind", "params"})
        term = parse_term({"kind": rec["kind"], "params": rec["params"]}, where)
        pieces.append(Piece(parse_number(rec["from"]), parse_number(rec["to"]), term))
    try:
        return Coefficient(tuple(pieces))
    except ValueError as exc:
        raise ProblemFileError(f"coefficient {name}: {exc}") from exc


def parse_problem(doc: dict) -> SLProblem:
    _check_keys("document", doc, {"interval", "coefficients"}, {"interval"})
    _check_keys("interval", doc["interval"], {"a", "b"})
    a = parse_number(doc["interval"]["a"])
    b = parse_number(doc["interval"]["b"])
    coeffs = doc.get("coefficients", {})
    _check_keys("coefficients", coeffs, set(COEFFICIENT_NAMES), set())
    defaults = {"p": 1.0, "q": 0.0, "r": 1.0, "s": 0.0}
    built = {n: parse_coefficient(coeffs.get(n, defaults[n]), n) for n in COEFFICIENT_NAMES}
    return validate_problem(SLProblem(Interval(a, b), **built))


def load_problem(path: str | Path) -> SLProblem:
    """Read and validate a problem file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc}") from exc
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ProblemFileError(f"{path}: {exc}") from exc
    return parse_problem(doc)
