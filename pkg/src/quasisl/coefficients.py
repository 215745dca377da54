"""Problem definition: interval, piecewise-elementary coefficients, validation.

A problem is the data of the four-coefficient expression

    tau f = (1/r) * ( -(f^[1])' + s f^[1] + q f ),   f^[1] = p (f' + s f)

on an interval (a, b) with -inf <= a < b <= inf.  Coefficients are
piecewise closed forms; that restriction is what lets us decide local
integrability and hand the integrator exact breakpoints.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate

from .errors import (
    EmptyInterval,
    NonLocallyIntegrable,
    NonPositiveCoefficient,
    NotDifferentiable,
    OscillatoryWitness,
    PreconditionError,
    QuadratureFailure,
)

COEFFICIENT_NAMES = ("p", "q", "r", "s")


# ---------------------------------------------------------------------------
# elementary terms


class Term:
    """A closed-form function of one variable.

    Subclasses implement scalar evaluation (``__call__``), vectorized
    evaluation (``values``) and a derivative.
    """

    kind = "term"

    def __call__(self, x: float) -> float:
        raise NotImplementedError

    def values(self, xs: np.ndarray) -> np.ndarray:
        return np.array([self(float(x)) for x in np.asarray(xs, dtype=float)])

    def derivative(self, x: float) -> float:
        raise NotImplementedError

    def powers(self) -> list[Power]:
        """Power terms contained in this term (for integrability checks)."""
        return []

    def params(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(Term):
    value: float
    kind = "constant"

    def __call__(self, x):
        return self.value

    def values(self, xs):
        return np.full(np.shape(xs), self.value, dtype=float)

    def derivative(self, x):
        return 0.0

    def params(self):
        return {"value": self.value}


@dataclass(frozen=True)
class Polynomial(Term):
    """``sum(coeffs[k] * x**k)``, coefficients in ascending order."""

    coeffs: tuple[float, ...]
    kind = "polynomial"

    def __call__(self, x):
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def values(self, xs):
        return np.polynomial.polynomial.polyval(np.asarray(xs, dtype=float), self.coeffs)

    def derivative(self, x):
        acc = 0.0
        for k in range(len(self.coeffs) - 1, 0, -1):
            acc = acc * x + k * self.coeffs[k]
        return acc

    def real_roots(self) -> list[float]:
        c = np.trim_zeros(np.asarray(self.coeffs, dtype=float), "b")
        if len(c) < 2:
            return []
        roots = np.roots(c[::-1])
        return sorted(float(z.real) for z in roots if abs(z.imag) <= 1e-12 * max(1.0, abs(z)))

    def params(self):
        return {"coeffs": list(self.coeffs)}


@dataclass(frozen=True)
class Power(Term):
    """``scale * |x - center|**exponent``."""

    scale: float
    center: float
    exponent: float
    kind = "power"

    def __call__(self, x):
        d = abs(x - self.center)
        if d == 0.0:
            if self.exponent > 0:
                return 0.0
            if self.exponent == 0:
                return self.scale
            return math.copysign(math.inf, self.scale)
        return self.scale * d**self.exponent

    def values(self, xs):
        d = np.abs(np.asarray(xs, dtype=float) - self.center)
        with np.errstate(divide="ignore"):
            return self.scale * d**self.exponent

    def derivative(self, x):
        d = x - self.center
        if d == 0.0:
            if self.exponent > 1 or self.exponent == 0:
                return 0.0
            raise NotDifferentiable(f"power term not differentiable at its center {self.center}")
        return self.scale * self.exponent * abs(d) ** (self.exponent - 1) * math.copysign(1.0, d)

    def powers(self):
        return [self]

    def params(self):
        return {"scale": self.scale, "center": self.center, "exponent": self.exponent}


@dataclass(frozen=True)
class Exp(Term):
    """``scale * exp(rate * x)``."""

    scale: float
    rate: float
    kind = "exp"

    def __call__(self, x):
        return self.scale * math.exp(self.rate * x)

    def values(self, xs):
        return self.scale * np.exp(self.rate * np.asarray(xs, dtype=float))

    def derivative(self, x):
        return self.scale * self.rate * math.exp(self.rate * x)

    def params(self):
        return {"scale": self.scale, "rate": self.rate}


@dataclass(frozen=True)
class Sin(Term):
    """``scale * sin(freq * x + phase)``."""

    scale: float = 1.0
    freq: float = 1.0
    phase: float = 0.0
    kind = "sin"

    def __call__(self, x):
        return self.scale * math.sin(self.freq * x + self.phase)

    def values(self, xs):
        return self.scale * np.sin(self.freq * np.asarray(xs, dtype=float) + self.phase)

    def derivative(self, x):
        return self.scale * self.freq * math.cos(self.freq * x + self.phase)

    def params(self):
        return {"scale": self.scale, "freq": self.freq, "phase": self.phase}


@dataclass(frozen=True)
class Cos(Term):
    """``scale * cos(freq * x + phase)``."""

    scale: float = 1.0
    freq: float = 1.0
    phase: float = 0.0
    kind = "cos"

    def __call__(self, x):
        return self.scale * math.cos(self.freq * x + self.phase)

    def values(self, xs):
        return self.scale * np.cos(self.freq * np.asarray(xs, dtype=float) + self.phase)

    def derivative(self, x):
        return -self.scale * self.freq * math.sin(self.freq * x + self.phase)

    def params(self):
        return {"scale": self.scale, "freq": self.freq, "phase": self.phase}


@dataclass(frozen=True)
class Sum(Term):
    terms: tuple[Term, ...]
    kind = "sum"

    def __call__(self, x):
        return math.fsum(t(x) for t in self.terms)

    def values(self, xs):
        out = np.zeros(np.shape(xs), dtype=float)
        for t in self.terms:
            out = out + t.values(xs)
        return out

    def derivative(self, x):
        return math.fsum(t.derivative(x) for t in self.terms)

    def powers(self):
        return [p for t in self.terms for p in t.powers()]

    def params(self):
        return {"terms": [{"kind": t.kind, "params": t.params()} for t in self.terms]}


def as_term(value) -> Term:
    if isinstance(value, Term):
        return value
    return Constant(float(value))


# ---------------------------------------------------------------------------
# piecewise coefficients


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    term: Term


@dataclass(frozen=True)
class Coefficient:
    """Piecewise-elementary function.

    Pieces are contiguous and ordered; each piece owns the half-open
    interval ``[lo, hi)`` for point evaluation, and one-sided limits at a
    breakpoint come from the adjacent piece.
    """

    pieces: tuple[Piece, ...]

    def __post_init__(self):
        if not self.pieces:
            raise PreconditionError("coefficient needs at least one piece")
        for pc in self.pieces:
            if not pc.lo < pc.hi:
                raise PreconditionError(f"piece [{pc.lo}, {pc.hi}] is empty")
        for left, right in zip(self.pieces, self.pieces[1:]):
            if left.hi != right.lo:
                raise PreconditionError(
                    f"pieces not contiguous: [{left.lo}, {left.hi}] then [{right.lo}, {right.hi}]"
                )

    @classmethod
    def constant(cls, value: float) -> Coefficient:
        return cls((Piece(-math.inf, math.inf, Constant(float(value))),))

    @classmethod
    def single(cls, term) -> Coefficient:
        return cls((Piece(-math.inf, math.inf, as_term(term)),))

    @classmethod
    def piecewise(cls, breaks: Sequence[float], terms: Sequence) -> Coefficient:
        """Build from interior breakpoints and ``len(breaks) + 1`` terms."""
        edges = [-math.inf, *map(float, breaks), math.inf]
        if len(terms) != len(edges) - 1:
            raise PreconditionError("need one term per piece")
        return cls(tuple(Piece(lo, hi, as_term(t)) for lo, hi, t in zip(edges, edges[1:], terms)))

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(pc.hi for pc in self.pieces[:-1])

    def piece_index(self, x: float, side: str = "right") -> int:
        for i, pc in enumerate(self.pieces):
            if side == "right":
                if x < pc.hi:
                    return i
            elif x <= pc.hi:
                return i
        return len(self.pieces) - 1

    def term_at(self, x: float, side: str = "right") -> Term:
        return self.pieces[self.piece_index(x, side)].term

    def __call__(self, x: float) -> float:
        return self.term_at(x)(x)

    def limit(self, x: float, side: str) -> float:
        """One-sided limit at ``x`` (``side`` is "left" or "right")."""
        return self.term_at(x, side)(x)

    def values(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        out = np.empty_like(xs)
        idx = np.searchsorted(np.array(self.breakpoints), xs, side="right")
        for i, pc in enumerate(self.pieces):
            mask = idx == i
            if np.any(mask):
                out[mask] = pc.term.values(xs[mask])
        return out

    def covers(self, a: float, b: float) -> bool:
        return self.pieces[0].lo <= a and self.pieces[-1].hi >= b


def as_coefficient(value) -> Coefficient:
    if isinstance(value, Coefficient):
        return value
    return Coefficient.single(value)


# ---------------------------------------------------------------------------
# interval and problem


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if math.isnan(self.a) or math.isnan(self.b) or not self.a < self.b:
            raise EmptyInterval(f"need a < b, got ({self.a}, {self.b})")
        if self.a == math.inf or self.b == -math.inf:
            raise EmptyInterval(f"endpoints out of order: ({self.a}, {self.b})")

    @property
    def finite_a(self) -> bool:
        return math.isfinite(self.a)

    @property
    def finite_b(self) -> bool:
        return math.isfinite(self.b)

    def endpoint(self, which: str) -> float:
        if which == "a":
            return self.a
        if which == "b":
            return self.b
        raise PreconditionError(f"endpoint must be 'a' or 'b', got {which!r}")

    def anchor(self) -> float:
        """A fixed interior reference point."""
        if self.finite_a and self.finite_b:
            return 0.5 * (self.a + self.b)
        if self.finite_a:
            return self.a + 1.0
        if self.finite_b:
            return self.b - 1.0
        return 0.0

    def contains(self, x: float, closed: bool = False) -> bool:
        if closed:
            return self.a <= x <= self.b
        return self.a < x < self.b


@dataclass(frozen=True)
class Annotation:
    """Validation output attached to a problem."""

    breakpoints: tuple[float, ...]
    jump_points: tuple[float, ...]
    min_p: float
    min_r: float
    n_checked: int


@dataclass(frozen=True)
class SLProblem:
    interval: Interval
    p: Coefficient
    q: Coefficient
    r: Coefficient
    s: Coefficient
    annotation: Annotation | None = field(default=None, compare=False)

    @property
    def a(self) -> float:
        return self.interval.a

    @property
    def b(self) -> float:
        return self.interval.b

    def coefficient(self, name: str) -> Coefficient:
        return getattr(self, name)

    def breakpoints(self) -> tuple[float, ...]:
        """All coefficient breakpoints strictly inside (a, b), sorted."""
        pts = set()
        for name in COEFFICIENT_NAMES:
            for x in self.coefficient(name).breakpoints:
                if self.a < x < self.b:
                    pts.add(float(x))
        return tuple(sorted(pts))

    def segment_terms(self, lo: float, hi: float) -> tuple[Term, Term, Term, Term]:
        """Terms of p, q, r, s on a segment free of interior breakpoints."""
        if math.isfinite(lo) and math.isfinite(hi):
            mid = 0.5 * (lo + hi)
        elif math.isfinite(lo):
            mid = lo + 1.0
        elif math.isfinite(hi):
            mid = hi - 1.0
        else:
            mid = 0.0
        return tuple(self.coefficient(n).term_at(mid) for n in COEFFICIENT_NAMES)

    def evaluable_at(self, x: float) -> bool:
        """True if every coefficient has a finite one-sided limit at ``x`` and p, r > 0.

        Integration can start or stop at such a point.
        """
        if not math.isfinite(x):
            return False
        sides = []
        if x > self.a:
            sides.append("left")
        if x < self.b:
            sides.append("right")
        for side in sides:
            vals = [self.coefficient(n).limit(x, side) for n in COEFFICIENT_NAMES]
            if not all(math.isfinite(v) for v in vals):
                return False
            if vals[0] <= 0 or vals[2] <= 0:
                return False
        return True

    def restrict(self, c: float, d: float) -> SLProblem:
        """Same coefficients on the subinterval (c, d)."""
        if not (self.a <= c < d <= self.b):
            raise PreconditionError(f"({c}, {d}) is not a subinterval of ({self.a}, {self.b})")
        return validate_problem(replace(self, interval=Interval(c, d), annotation=None))


def make_problem(a: float, b: float, p=1.0, q=0.0, r=1.0, s=0.0) -> SLProblem:
    """Convenience constructor; coefficients may be numbers, terms or Coefficients."""
    prob = SLProblem(
        Interval(float(a), float(b)),
        as_coefficient(p),
        as_coefficient(q),
        as_coefficient(r),
        as_coefficient(s),
    )
    return validate_problem(prob)


def delta_interaction_problem(alpha: float, x0: float, a: float = 0.0, b: float = 1.0) -> SLProblem:
    """p = r = 1, s = alpha*H(x - x0), q = -alpha**2*H(x - x0).

    The effective potential is -alpha * delta(x - x0).
    """
    s = Coefficient.piecewise([x0], [0.0, alpha])
    q = Coefficient.piecewise([x0], [0.0, -alpha * alpha])
    return make_problem(a, b, p=1.0, q=q, r=1.0, s=s)


# ---------------------------------------------------------------------------
# validation


def _sample_points(lo: float, hi: float, n: int = 65) -> np.ndarray:
    if math.isfinite(lo) and math.isfinite(hi):
        t = (np.arange(1, n + 1)) / (n + 1)
        return lo + (hi - lo) * t
    t = (np.arange(1, n + 1)) / (n + 1)
    offsets = np.tan(0.5 * math.pi * t)
    extra = 10.0 ** np.arange(-3, 7)
    offsets = np.concatenate([offsets, extra])
    if math.isfinite(lo):
        return lo + offsets
    if math.isfinite(hi):
        return hi - offsets
    return np.concatenate([-offsets[::-1], [0.0], offsets])


def _check_local_integrability(name: str, pc: Piece, a: float, b: float) -> None:
    lo, hi = max(pc.lo, a), min(pc.hi, b)
    for pw in pc.term.powers():
        if pw.scale == 0.0:
            continue
        touches = lo <= pw.center <= hi and a < pw.center < b
        if not touches:
            continue
        if name == "p":
            # 1/p ~ |x-c|^(-e) near an interior zero of p
            if isinstance(pc.term, Power) and pw.exponent >= 1:
                raise NonLocallyIntegrable(
                    f"1/p is not integrable near {pw.center} (p ~ |x-c|^{pw.exponent})"
                )
        elif pw.exponent <= -1:
            raise NonLocallyIntegrable(
                f"{name} has a non-integrable power singularity at interior point {pw.center}"
            )
    if name == "p" and isinstance(pc.term, Polynomial):
        for root in pc.term.real_roots():
            if lo < root < hi and a < root < b:
                left, right = pc.term(root - 1e-7 * (1 + abs(root))), pc.term(root + 1e-7 * (1 + abs(root)))
                if left > 0 and right > 0:
                    raise NonLocallyIntegrable(f"p has an interior double zero at {root}")
                raise NonPositiveCoefficient(f"p changes sign at {root}")


def validate_problem(problem: SLProblem) -> SLProblem:
    """Check positivity of p and r and local integrability; attach an annotation.

    Idempotent: re-validating returns an equal annotation.
    """
    a, b = problem.a, problem.b
    for name in COEFFICIENT_NAMES:
        if not problem.coefficient(name).covers(a, b):
            raise PreconditionError(f"coefficient {name} does not cover ({a}, {b})")

    min_vals = {"p": math.inf, "r": math.inf}
    n_checked = 0
    for name in COEFFICIENT_NAMES:
        coef = problem.coefficient(name)
        for pc in coef.pieces:
            lo, hi = max(pc.lo, a), min(pc.hi, b)
            if not lo < hi:
                continue
            _check_local_integrability(name, pc, a, b)
            xs = _sample_points(lo, hi)
            with np.errstate(all="ignore"):
                vals = pc.term.values(xs)
            n_checked += len(xs)
            if not np.all(np.isfinite(vals)):
                bad = float(xs[~np.isfinite(vals)][0])
                raise NonLocallyIntegrable(f"{name} is not finite at interior point {bad}")
            if name in min_vals:
                m = float(np.min(vals))
                if m <= 0:
                    bad = float(xs[np.argmin(vals)])
                    raise NonPositiveCoefficient(f"{name}({bad:.6g}) = {m:.6g} <= 0")
                min_vals[name] = min(min_vals[name], m)

    bps = problem.breakpoints()
    jumps = []
    for x in bps:
        for name in COEFFICIENT_NAMES:
            coef = problem.coefficient(name)
            left, right = coef.limit(x, "left"), coef.limit(x, "right")
            if not (left == right or abs(left - right) <= 1e-14 * max(abs(left), abs(right))):
                jumps.append(x)
                break
    ann = Annotation(
        breakpoints=bps,
        jump_points=tuple(jumps),
        min_p=min_vals["p"],
        min_r=min_vals["r"],
        n_checked=n_checked,
    )
    return replace(problem, annotation=ann)


# ---------------------------------------------------------------------------
# regularity and endpoint classification


@dataclass(frozen=True)
class QuadratureConfig:
    """Truncation-sequence settings for improper integrals.

    Toward a finite endpoint e the cutoffs are ``e -+ |e - c| * 10**-k``;
    toward an infinite one they are ``c +- 10**k``, with ``k`` running
    over ``exponents`` and ``c`` the interval anchor.  Divergence is
    declared when the last partial integral exceeds ``growth`` times the
    one three refinements earlier.
    """

    exponents: tuple[int, ...] = (2, 3, 4, 5, 6, 7, 8)
    growth: float = 1.5
    epsabs: float = 1e-13
    epsrel: float = 1e-10
    limit: int = 200

    def cutoffs(self, interval: Interval, endpoint: str) -> list[float]:
        c = interval.anchor()
        e = interval.endpoint(endpoint)
        sign = 1.0 if endpoint == "b" else -1.0
        if math.isfinite(e):
            return [e - sign * abs(e - c) * 10.0 ** (-k) for k in self.exponents]
        return [c + sign * 10.0**k for k in self.exponents]


@dataclass(frozen=True)
class TruncationConfig:
    """Cutoff points used when an ODE must be integrated toward an endpoint.

    Finite endpoint e: ``e -+ |e - c| * ratio**k`` for k = 1..levels.
    Infinite endpoint: ``base +- start * factor**k`` for k = 0..levels-1,
    where ``base`` is the other endpoint when finite and 0 otherwise.
    """

    levels: int = 6
    ratio: float = 0.1
    start: float = 10.0
    factor: float = 2.0
    anchor: float | None = None

    def anchor_for(self, interval: Interval) -> float:
        return interval.anchor() if self.anchor is None else self.anchor

    def cutoffs(self, interval: Interval, endpoint: str) -> list[float]:
        c = self.anchor_for(interval)
        e = interval.endpoint(endpoint)
        sign = 1.0 if endpoint == "b" else -1.0
        if math.isfinite(e):
            return [e - sign * abs(e - c) * self.ratio**k for k in range(1, self.levels + 1)]
        other = interval.a if endpoint == "b" else interval.b
        base = other if math.isfinite(other) else 0.0
        pts = [base + sign * self.start * self.factor**k for k in range(self.levels)]
        if any(sign * (t - c) <= 0 for t in pts):
            raise PreconditionError("truncation cutoffs must lie beyond the anchor")
        return pts


@dataclass(frozen=True)
class IntegrabilityEvidence:
    name: str
    endpoint: str
    cutoffs: tuple[float, ...]
    partial_integrals: tuple[float, ...]
    converges: bool


@dataclass(frozen=True)
class ClassificationReport:
    regular: bool
    integrability: tuple[IntegrabilityEvidence, ...]
    endpoint_a: str
    endpoint_b: str
    witness_a: float | None = None
    witness_b: float | None = None

    def evidence(self, name: str, endpoint: str) -> IntegrabilityEvidence:
        for ev in self.integrability:
            if ev.name == name and ev.endpoint == endpoint:
                return ev
        raise KeyError((name, endpoint))


def _integrate_between(problem: SLProblem, func, lo: float, hi: float, quad: QuadratureConfig) -> float:
    """Integrate ``func(x)`` over [lo, hi] split at coefficient breakpoints."""
    if lo == hi:
        return 0.0
    sgn = 1.0
    if lo > hi:
        lo, hi, sgn = hi, lo, -1.0
    cuts = [lo] + [x for x in problem.breakpoints() if lo < x < hi] + [hi]
    total = 0.0
    for u, v in zip(cuts, cuts[1:]):
        terms = dict(zip(COEFFICIENT_NAMES, problem.segment_terms(u, v)))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            try:
                val, _ = integrate.quad(
                    lambda x: func(terms, x),
                    u,
                    v,
                    epsabs=quad.epsabs,
                    epsrel=quad.epsrel,
                    limit=quad.limit,
                )
            except (ZeroDivisionError, OverflowError, ValueError) as exc:
                raise QuadratureFailure(f"integrand evaluation failed on [{u}, {v}]: {exc}") from exc
        if not math.isfinite(val):
            raise QuadratureFailure(f"non-finite integral on [{u}, {v}]")
        total += val
    return sgn * total


def truncated_integrals(problem: SLProblem, func, endpoint: str, quad: QuadratureConfig) -> tuple[list[float], list[float]]:
    """Partial integrals of ``func`` from the anchor toward ``endpoint``.

    ``func(terms, x)`` receives the dict of segment terms.  Returns
    ``(cutoffs, partial_integrals)``; integrals are oriented so that they
    are nonnegative for nonnegative integrands.
    """
    c = problem.interval.anchor()
    cuts = quad.cutoffs(problem.interval, endpoint)
    partial = []
    acc = 0.0
    prev = c
    for t in cuts:
        acc += _integrate_between(problem, func, min(prev, t), max(prev, t), quad)
        partial.append(acc)
        prev = t
    return cuts, partial


def diverges(partial: Sequence[float], growth: float = 1.5) -> bool:
    """Growth-ratio divergence test over the last three refinements."""
    if len(partial) < 4:
        raise PreconditionError("need at least four partial integrals")
    last, ref = partial[-1], partial[-4]
    if ref <= 0.0:
        return last > 0.0 and partial[-1] - partial[-2] >= partial[-2] - partial[-3] > 0
    return last > growth * ref


_INTEGRANDS = {
    "1/p": lambda t, x: 1.0 / abs(t["p"](x)),
    "q": lambda t, x: abs(t["q"](x)),
    "r": lambda t, x: abs(t["r"](x)),
    "s": lambda t, x: abs(t["s"](x)),
}


def _sqrt_r_over_p(t, x):
    return math.sqrt(abs(t["r"](x) / t["p"](x)))


def _endpoint_evidence(problem: SLProblem, endpoint: str, quad: QuadratureConfig) -> list[IntegrabilityEvidence]:
    out = []
    for name, fn in _INTEGRANDS.items():
        cuts, partial = truncated_integrals(problem, fn, endpoint, quad)
        out.append(
            IntegrabilityEvidence(
                name=name,
                endpoint=endpoint,
                cutoffs=tuple(cuts),
                partial_integrals=tuple(partial),
                converges=not diverges(partial, quad.growth),
            )
        )
    return out


def endpoint_is_regular(problem: SLProblem, endpoint: str, quad: QuadratureConfig | None = None) -> bool:
    quad = quad or QuadratureConfig()
    if not math.isfinite(problem.interval.endpoint(endpoint)):
        return False
    return all(ev.converges for ev in _endpoint_evidence(problem, endpoint, quad))


DEFAULT_WITNESSES = (0.0, -1.0, -10.0, -100.0)


def classify_regularity(
    problem: SLProblem,
    quad: QuadratureConfig | None = None,
    witnesses: Iterable[float] = DEFAULT_WITNESSES,
    truncation: TruncationConfig | None = None,
) -> ClassificationReport:
    """Regularity verdict plus a limit-point/limit-circle verdict per endpoint.

    Singular endpoints are tested with the sufficient criterion
    (nonoscillation + divergence of the integral of sqrt(r/p)), trying each
    witness value of lambda in turn until one is nonoscillatory.
    """
    quad = quad or QuadratureConfig()
    evidence = _endpoint_evidence(problem, "a", quad) + _endpoint_evidence(problem, "b", quad)
    reg = {
        e: math.isfinite(problem.interval.endpoint(e))
        and all(ev.converges for ev in evidence if ev.endpoint == e)
        for e in ("a", "b")
    }
    types = {}
    used = {}
    witnesses = tuple(witnesses)
    for e in ("a", "b"):
        if reg[e]:
            types[e], used[e] = "limit-circle", None
            continue
        types[e], used[e] = "undetermined", None
        for lam in witnesses:
            try:
                verdict = limit_point_test(problem, e, lam, quad, truncation, _regular=False)
            except OscillatoryWitness:
                continue
            types[e], used[e] = verdict, lam
            break
    return ClassificationReport(
        regular=reg["a"] and reg["b"],
        integrability=tuple(evidence),
        endpoint_a=types["a"],
        endpoint_b=types["b"],
        witness_a=used["a"],
        witness_b=used["b"],
    )


def nonoscillatory_beyond(traj, cutoffs: Sequence[float]) -> bool:
    """True unless zeros keep appearing in each of the last two truncation windows."""
    windows = list(zip(cutoffs[-3:-1], cutoffs[-2:]))
    hits = 0
    for lo, hi in windows:
        lo, hi = min(lo, hi), max(lo, hi)
        if any(lo < z < hi for z in traj.zero_locations()):
            hits += 1
    return hits < len(windows)


def limit_point_test(
    problem: SLProblem,
    endpoint: str,
    lambda_witness: float,
    quad: QuadratureConfig | None = None,
    truncation: TruncationConfig | None = None,
    *,
    _regular: bool | None = None,
) -> str:
    """Three-valued endpoint verdict: "limit-circle", "limit-point" or "undetermined".

    Regular endpoints are limit circle.  Otherwise the endpoint is limit
    point when ``tau - lambda_witness`` is nonoscillatory there and the
    integral of sqrt(r/p) diverges; when the integral converges the test is
    silent.  Raises :class:`OscillatoryWitness` when the witness solution
    keeps crossing zero toward the endpoint.
    """
    from .quasi_ode import IVPSpec, integrate_ivp

    quad = quad or QuadratureConfig()
    truncation = truncation or TruncationConfig()
    regular = endpoint_is_regular(problem, endpoint, quad) if _regular is None else _regular
    if regular:
        return "limit-circle"

    cuts = truncation.cutoffs(problem.interval, endpoint)
    x0 = truncation.anchor_for(problem.interval)
    traj = integrate_ivp(problem, IVPSpec(x0=x0, u0=1.0, u1_0=0.0, lam=lambda_witness, target=cuts[-1]))
    if not nonoscillatory_beyond(traj, [x0, *cuts]):
        raise OscillatoryWitness(
            f"solution at lambda={lambda_witness} oscillates toward endpoint {endpoint}; try a smaller lambda"
        )
    _, partial = truncated_integrals(problem, _sqrt_r_over_p, endpoint, quad)
    return "limit-point" if diverges(partial, quad.growth) else "undetermined"


# ---------------------------------------------------------------------------
# reporting only


@dataclass(frozen=True)
class DeltaComponent:
    location: float
    weight: float


def effective_potential(problem: SLProblem, x: float) -> tuple[float, list[DeltaComponent]]:
    """Formal potential ``-(p s)' + p s**2 + q`` at ``x`` and its Dirac components.

    Dirac weights are ``-(jump of p*s)`` at each breakpoint where p*s jumps.
    Diagnostic only; the solver never uses it.
    """
    deltas = []
    for c in problem.breakpoints():
        ps_left = problem.p.limit(c, "left") * problem.s.limit(c, "left")
        ps_right = problem.p.limit(c, "right") * problem.s.limit(c, "right")
        if ps_right != ps_left:
            deltas.append(DeltaComponent(c, -(ps_right - ps_left)))
    if any(x == d.location for d in deltas):
        raise PreconditionError(f"x = {x} is a jump point of p*s")
    p_t, q_t = problem.p.term_at(x), problem.q.term_at(x)
    s_t = problem.s.term_at(x)
    pv, sv = p_t(x), s_t(x)
    if sv == 0.0 and isinstance(s_t, Constant):
        return q_t(x), deltas
    dps = p_t.derivative(x) * sv + pv * s_t.derivative(x)
    if not math.isfinite(dps):
        raise NotDifferentiable(f"p*s is not differentiable at {x}")
    return -dps + pv * sv * sv + q_t(x), deltas
