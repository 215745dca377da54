"""Greatest lower bound of the Friedrichs extension and the factorization identities.

For lambda below the bottom of the spectrum, tau - lambda is disconjugate and
has a positive solution u0, and for compactly supported f

    (f, tau f) = lambda ||f||^2 + int p u0^2 |(f / u0)'|^2.

The disconjugacy threshold therefore equals the greatest lower bound.  It
is found by bisection on the disconjugacy predicate, one ODE solve per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .coefficients import SLProblem, TruncationConfig
from .errors import (
    CeilingReached,
    FloorReached,
    MonotonicityViolation,
    NonPositive,
    PreconditionError,
    SupportViolation,
)
from .functions import TestFunction
from .quasi_ode import SolutionTrajectory, gauss_cells
from .solutions import disconjugacy_check, positive_solution


@dataclass(frozen=True)
class LowerBoundResult:
    lambda0: float
    bracket: tuple[float, float]
    witness_positive: SolutionTrajectory | None
    witness_violation: tuple[float, float] | None
    truncation_trace: tuple[tuple[tuple[float, float], float], ...] = ()
    extrapolated: bool = False

    def record(self) -> dict:
        return {
            "lambda0": self.lambda0,
            "bracket_lo": self.bracket[0],
            "bracket_hi": self.bracket[1],
            "truncation_trace": [
                {"interval": list(iv), "threshold": lam} for iv, lam in self.truncation_trace
            ],
        }


def _is_disconjugate(problem: SLProblem, lam: float, ztol: float) -> bool:
    return disconjugacy_check(problem, lam, witness=False, ztol=ztol).disconjugate


def _threshold(problem: SLProblem, floor: float, ceiling: float, tol: float) -> tuple[float, float]:
    """Bisection bracket (lo, hi) of the disconjugacy threshold on a regular problem."""
    ztol = 1e-12 * (problem.b - problem.a)
    if _is_disconjugate(problem, ceiling, ztol):
        raise CeilingReached(f"still disconjugate at lambda = {ceiling}")
    # Probes far below the threshold are expensive (fast exponential growth
    # forces tiny steps), so start from inf q/r when it checks out.
    lo = float(floor)
    est = form_floor(problem, problem.a, problem.b)
    est -= max(tol, 1e-6 * abs(est))
    if floor < est < ceiling and _is_disconjugate(problem, est, ztol):
        lo = est
    elif not _is_disconjugate(problem, floor, ztol):
        raise FloorReached(f"not disconjugate even at lambda = {floor}")
    hi = float(ceiling)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _is_disconjugate(problem, mid, ztol):
            lo = mid
        else:
            hi = mid
    return lo, hi


def truncation_intervals(problem: SLProblem, truncation: TruncationConfig) -> list[tuple[float, float]]:
    """Nested regular subintervals exhausting (a, b), one per truncation level."""
    levels = truncation.levels
    cuts = {}
    for e in ("a", "b"):
        x = problem.interval.endpoint(e)
        cuts[e] = [x] * levels if problem.evaluable_at(x) else truncation.cutoffs(problem.interval, e)
    return list(zip(cuts["a"], cuts["b"]))


def form_floor(problem: SLProblem, c: float, d: float, n: int = 2001) -> float:
    """Sampled infimum of q/r on [c, d].

    Q_F(f, f) >= int q |f|^2 >= inf(q/r) ||f||_r^2 since the p^-1 |f1|^2
    part is nonnegative, so this bounds the greatest lower bound from below.
    """
    xs = np.linspace(c, d, n)
    xs = np.unique(np.concatenate([xs, [x for x in problem.breakpoints() if c < x < d]]))
    vals = []
    for side in ("left", "right"):
        for x in xs:
            if (side == "left" and x == c) or (side == "right" and x == d):
                continue
            q = problem.q.limit(x, side)
            r = problem.r.limit(x, side)
            vals.append(q / r)
    return float(min(vals))


def _aitken(seq: Sequence[float]) -> float:
    x0, x1, x2 = seq[-3:]
    den = x2 - 2 * x1 + x0
    if den == 0.0:
        return x2
    return x2 - (x2 - x1) ** 2 / den


def greatest_lower_bound(
    problem: SLProblem,
    search: tuple[float, float] = (-1e3, 1e3),
    tol: float = 1e-8,
    truncation: TruncationConfig | None = None,
) -> LowerBoundResult:
    """Disconjugacy threshold, which equals the greatest lower bound of T_F.

    Regular problems: bisection to a bracket of width ``tol``; lambda0 is
    its midpoint, the positive witness is taken at the lower end and the
    violating zero pair at the upper end.

    Singular problems: thresholds on the nested truncation intervals
    decrease toward lambda0.  They are computed one by one (each search
    capped by the previous threshold), checked for strict decrease, and
    extrapolated with Aitken's delta-squared process.  The estimate is kept
    between the sampled infimum of q/r (a lower bound of the form) and the
    last threshold.
    """
    floor, ceiling = map(float, search)
    if not floor < ceiling:
        raise PreconditionError("search range must have floor < ceiling")
    singular = not (problem.evaluable_at(problem.a) and problem.evaluable_at(problem.b))
    if not singular:
        lo, hi = _threshold(problem, floor, ceiling, tol)
        witness = positive_solution(problem, lo)
        chk = disconjugacy_check(problem, hi, witness=False, ztol=1e-12 * (problem.b - problem.a))
        return LowerBoundResult(0.5 * (lo + hi), (lo, hi), witness, chk.zeros)

    truncation = truncation or TruncationConfig()
    trace = []
    cap = ceiling
    last = None
    for c, d in truncation_intervals(problem, truncation):
        sub = problem.restrict(c, d)
        lo, hi = _threshold(sub, floor, cap, tol)
        lam = 0.5 * (lo + hi)
        if trace and not lam < trace[-1][1]:
            raise MonotonicityViolation(
                f"threshold on ({c}, {d}) = {lam} does not decrease from {trace[-1][1]}"
            )
        trace.append(((c, d), lam))
        cap = min(hi + tol, ceiling)
        last = (sub, lo, hi)
    lams = [t for _, t in trace]
    est = _aitken(lams) if len(lams) >= 3 else lams[-1]
    c, d = trace[-1][0]
    est = min(max(est, form_floor(problem, c, d)), lams[-1])
    sub, lo, hi = last
    witness = positive_solution(sub, lo)
    chk = disconjugacy_check(sub, hi, witness=False, ztol=1e-12 * (sub.b - sub.a))
    return LowerBoundResult(float(est), (lo, hi), witness, chk.zeros, tuple(trace), extrapolated=True)


# ---------------------------------------------------------------------------
# identities


def _positive_values(u0: SolutionTrajectory, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    u, v = u0.evaluate(xs)
    if np.any(u <= 0):
        bad = xs[np.argmax(u <= 0)]
        raise NonPositive(f"u0 is not positive at x = {bad}")
    return u, v


def _check_support(problem: SLProblem, f: TestFunction, u0: SolutionTrajectory) -> tuple[float, float]:
    lo, hi = f.support
    if not (problem.a < lo and hi < problem.b):
        raise SupportViolation(f"support {f.support} must lie strictly inside ({problem.a}, {problem.b})")
    if not (u0.covers(lo) and u0.covers(hi)):
        raise SupportViolation("u0 does not cover the support of f")
    return lo, hi


def q_recovery_residual(problem: SLProblem, u0: SolutionTrajectory, lambda0: float, grid) -> float:
    """max |q - [lambda0 r - s u0_1 / u0 + (u0_1)' / u0]| over ``grid``.

    (u0_1)' is the derivative of the dense output, which equals the
    right side s u0_1 + (q - lambda r) u0 at nodes, so the residual is a
    health metric for the trajectory.  Grid points at coefficient jumps
    are evaluated with the right-hand pieces.
    """
    xs = np.asarray(grid, dtype=float)
    u, v = _positive_values(u0, xs)
    _, dv = u0.derivative(xs)
    q, r, s = problem.q.values(xs), problem.r.values(xs), problem.s.values(xs)
    rec = lambda0 * r - s * v / u + dv / u
    return float(np.max(np.abs(q - rec)))


def _fd_grid(problem: SLProblem, lo: float, hi: float, h: float) -> np.ndarray:
    """Uniform grid of spacing h on [lo, hi] without points near coefficient jumps."""
    n = int(round((hi - lo) / h))
    xs = lo + h * np.arange(n + 1)
    for c in problem.breakpoints():
        xs = xs[np.abs(xs - c) > 2.5 * h]
    return xs


def _d(vals_p: np.ndarray, vals_m: np.ndarray, h: float) -> np.ndarray:
    return (vals_p - vals_m) / (2 * h)


def jacobi_factorization_residual(
    problem: SLProblem, f: TestFunction, u0: SolutionTrajectory, lambda0: float, h: float = 1e-3
) -> float:
    """Max difference of the two sides of Jacobi's factorization on a grid of step h.

        -(f1)' + s f1 + [(u0_1)'/u0] f - s [u0_1/u0] f  =  -(1/u0) [p u0^2 (f/u0)']'

    All derivatives are centered differences (nested ones use the +-h
    neighbours), so the residual is O(h^2).  ``lambda0`` only documents
    which solution u0 is.
    """
    lo, hi = _check_support(problem, f, u0)
    del lambda0
    xs = _fd_grid(problem, lo, hi, h)
    if len(xs) == 0:
        return 0.0
    p = problem.p.values
    s = problem.s.values

    def f1(x):
        fv = f.values(x)
        return p(x) * (_d(f.values(x + h), f.values(x - h), h) + s(x) * fv)

    def flux(x):
        u, _ = u0.evaluate(x)
        w = lambda y: f.values(y) / u0.evaluate(y)[0]  # noqa: E731
        return p(x) * u * u * _d(w(x + h), w(x - h), h)

    u, v = _positive_values(u0, xs)
    _, vp = u0.evaluate(xs + h)
    _, vm = u0.evaluate(xs - h)
    fv = f.values(xs)
    f1v = f1(xs)
    lhs = -_d(f1(xs + h), f1(xs - h), h) + s(xs) * f1v + _d(vp, vm, h) / u * fv - s(xs) * v / u * fv
    rhs = -_d(flux(xs + h), flux(xs - h), h) / u
    return float(np.max(np.abs(lhs - rhs)))


def integrand_consistency_check(
    problem: SLProblem, f: TestFunction, u0: SolutionTrajectory, h: float = 1e-3
) -> float:
    """Max deviation of p u0^2 |(f/u0)'|^2 from p^-1 u0^2 |(f1 u0 - f u0_1)/u0^2|^2.

    Both derivatives are centered differences, so the deviation is O(h^2).
    """
    lo, hi = _check_support(problem, f, u0)
    xs = _fd_grid(problem, lo, hi, h)
    if len(xs) == 0:
        return 0.0
    u, v = _positive_values(u0, xs)
    up, _ = u0.evaluate(xs + h)
    um, _ = u0.evaluate(xs - h)
    p, s = problem.p.values(xs), problem.s.values(xs)
    fv = f.values(xs)
    dq = _d(f.values(xs + h) / up, f.values(xs - h) / um, h)
    left = p * u * u * dq * dq
    f1 = p * (_d(f.values(xs + h), f.values(xs - h), h) + s * fv)
    w = (f1 * u - fv * v) / (u * u)
    right = u * u * w * w / p
    return float(np.max(np.abs(left - right)))


@dataclass(frozen=True)
class EnergyCheck:
    lhs: float
    rhs: float
    gap: float
    norm2: float
    inequality_margin: float  # lhs - lambda0 ||f||^2, nonnegative up to quadrature error


def energy_identity_check(
    problem: SLProblem, f: TestFunction, u0: SolutionTrajectory, lambda0: float, n_cells: int = 256
) -> EnergyCheck:
    """Both sides of (f, tau f) = lambda0 ||f||^2 + int p u0^2 |(f/u0)'|^2.

    (f, tau f) is evaluated in its integrated form int p |f' + s f|^2 + q f^2;
    u0' = u0_1 / p - s u0 comes from the trajectory.  Gauss quadrature on
    cells split at the knots of f and at coefficient breakpoints.
    """
    lo, hi = _check_support(problem, f, u0)
    pts = np.linspace(lo, hi, n_cells + 1)
    pts = np.unique(np.concatenate([pts, [k for k in f.knots if lo < k < hi], [b for b in problem.breakpoints() if lo < b < hi]]))
    xg, wg = gauss_cells(pts[:-1], pts[1:])
    xs, w = xg.ravel(), wg.ravel()
    p, q, r, s = (problem.coefficient(n).values(xs) for n in ("p", "q", "r", "s"))
    fv, df = f.values(xs), f.slopes(xs)
    u, v = _positive_values(u0, xs)
    du = v / p - s * u
    lhs = float(np.sum(w * (p * (df + s * fv) ** 2 + q * fv * fv)))
    norm2 = float(np.sum(w * r * fv * fv))
    dq = (df * u - fv * du) / (u * u)
    rhs = lambda0 * norm2 + float(np.sum(w * p * u * u * dq * dq))
    return EnergyCheck(lhs, rhs, abs(lhs - rhs), norm2, lhs - lambda0 * norm2)


@dataclass(frozen=True)
class OrderStudy:
    steps: tuple[float, ...]
    residuals: tuple[float, ...]
    orders: tuple[float, ...] = field(default=())

    @property
    def min_order(self) -> float:
        return min(self.orders) if self.orders else math.nan


def convergence_order(residual: Callable[[float], float], h0: float, halvings: int = 2) -> OrderStudy:
    """Residuals at h0, h0/2, ... and observed orders log2(r_h / r_{h/2})."""
    steps = [h0 / 2**k for k in range(halvings + 1)]
    res = [residual(h) for h in steps]
    orders = []
    for r0, r1 in zip(res, res[1:]):
        orders.append(math.log2(r0 / r1) if r0 > 0 and r1 > 0 else math.inf)
    return OrderStudy(tuple(steps), tuple(res), tuple(orders))


def energy_inequality_quotients(problem: SLProblem, fs: Sequence[TestFunction]) -> np.ndarray:
    """(f, tau f) / ||f||^2 for each f (the integrated form, no u0 needed)."""
    from .spectral import form_values

    out = []
    for f in fs:
        form, norm2 = form_values(problem, f)
        out.append(form / norm2)
    return np.array(out)
