"""Separated boundary conditions, eigenvalues and Rayleigh quotients.

Eigenvalues are located with the Prufer angle theta, u = rho sin(theta),
u1 = rho cos(theta).  Along a solution theta increases through every
multiple of pi exactly at zeros of u, and theta(b) is strictly increasing
in lambda.  The left condition fixes theta(a) = alpha = (pi - gamma) mod pi,
the right one asks theta(b) = beta + (n - 1) pi with beta = pi - delta, and
the n-th eigenvalue is the unique root of that equation.  This gives the
index of every eigenvalue directly, for any delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize

from .coefficients import SLProblem
from .errors import (
    BoundaryViolation,
    BracketFailure,
    EndpointSingular,
    MonotonicityViolation,
    PreconditionError,
)
from .functions import TestFunction
from .quasi_ode import IVPSpec, SolutionTrajectory, count_zeros, gauss_cells, integrate_ivp

BOUNDARY_TOL = 1e-7


@dataclass(frozen=True)
class BoundaryCondition:
    """sin(gamma) u1(a) + cos(gamma) u(a) = 0, sin(delta) u1(b) + cos(delta) u(b) = 0.

    Angles are reduced into [0, pi); gamma = delta = 0 is Dirichlet.
    """

    gamma: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        for name in ("gamma", "delta"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise PreconditionError(f"{name} must be finite")
            v = math.fmod(v, math.pi)
            if v < 0:
                v += math.pi
            if v >= math.pi or abs(v - math.pi) < 1e-15:
                v = 0.0
            object.__setattr__(self, name, v)

    @property
    def is_dirichlet(self) -> bool:
        return self.gamma == 0.0 and self.delta == 0.0

    def left_data(self) -> tuple[float, float]:
        """(u, u1) at a with angle alpha = (pi - gamma) mod pi; (0, 1) for Dirichlet."""
        alpha = 0.0 if self.gamma == 0.0 else math.pi - self.gamma
        return math.sin(alpha), math.cos(alpha)

    @property
    def alpha(self) -> float:
        return 0.0 if self.gamma == 0.0 else math.pi - self.gamma

    @property
    def beta(self) -> float:
        return math.pi - self.delta

    def right_functional(self, u: float, u1: float) -> float:
        return math.sin(self.delta) * u1 + math.cos(self.delta) * u


DIRICHLET = BoundaryCondition(0.0, 0.0)
NEUMANN = BoundaryCondition(0.5 * math.pi, 0.5 * math.pi)


@dataclass(frozen=True)
class EigenResult:
    index: int
    lam: float
    bc: BoundaryCondition
    eigenfunction: SolutionTrajectory
    mismatch_residual: float
    oscillation_count: int

    def record(self) -> dict:
        return {
            "index": self.index,
            "lambda": self.lam,
            "residual": self.mismatch_residual,
            "zeros": self.oscillation_count,
        }


def _require_regular_ends(problem: SLProblem) -> None:
    for e in (problem.a, problem.b):
        if not problem.evaluable_at(e):
            raise EndpointSingular(
                f"endpoint {e} is singular; eigenvalues need a regular problem (truncate first)"
            )


def _shoot(problem: SLProblem, lam: float, bc: BoundaryCondition, rtol: float, stop: int | None = None):
    u0, v0 = bc.left_data()
    return integrate_ivp(
        problem,
        IVPSpec(x0=problem.a, u0=u0, u1_0=v0, lam=lam, target=problem.b, rtol=rtol, atol=rtol),
        stop_after_zeros=stop,
    )


def _interior_zero_count(traj: SolutionTrajectory) -> int:
    a = traj.start.x
    return sum(1 for z in traj.zeros if z.x != a)


def prufer_angle(
    problem: SLProblem,
    lam: float,
    bc: BoundaryCondition = DIRICHLET,
    rtol: float = 1e-10,
    stop: int | None = None,
) -> float:
    """theta(b) for the solution satisfying the left condition.

    With ``stop`` integration ends after that many zeros and the value
    returned is a lower bound (a multiple of pi).
    """
    traj = _shoot(problem, lam, bc, rtol, stop)
    n = _interior_zero_count(traj)
    x_end, u, v, _ = traj.end_state()
    if stop is not None and n >= stop and x_end < problem.b:
        return n * math.pi
    sgn = -1.0 if n % 2 else 1.0
    return n * math.pi + math.atan2(sgn * u, sgn * v)


def shoot_mismatch(
    problem: SLProblem, lam: float, bc: BoundaryCondition = DIRICHLET, rtol: float = 1e-10
) -> tuple[float, int]:
    """Right boundary functional of the left-normalized solution and its zero count in (a, b)."""
    _require_regular_ends(problem)
    traj = _shoot(problem, lam, bc, rtol)
    _, u, v, lg = traj.end_state()
    with np.errstate(over="ignore"):
        m = bc.right_functional(u, v) * float(np.exp(lg))
    return m, count_zeros(traj, (problem.a, problem.b), open=True)


def _weyl_estimate(problem: SLProblem, n: int) -> float:
    xs = np.linspace(problem.a, problem.b, 257)[1:-1]
    p, q, r = problem.p.values(xs), problem.q.values(xs), problem.r.values(xs)
    length = np.mean(np.sqrt(r / p)) * (problem.b - problem.a)
    return (n * math.pi / length) ** 2 + float(np.mean(q / r))


def eigenvalue(
    problem: SLProblem,
    n: int,
    bc: BoundaryCondition = DIRICHLET,
    tol: float = 1e-8,
    rtol: float = 1e-10,
) -> EigenResult:
    """n-th eigenvalue (1-based) for separated conditions on a regular problem.

    Brackets the root of theta(b; lam) - (beta + (n - 1) pi) by expanding
    around a Weyl-type estimate, then refines with Brent's method.  The
    eigenfunction is normalized to unit r-weighted norm with u1(a) > 0
    (Dirichlet at a) or u(a) > 0.
    """
    if n < 1:
        raise PreconditionError(f"index must be >= 1, got {n}")
    _require_regular_ends(problem)
    target = bc.beta + (n - 1) * math.pi

    def gap(lam: float, fast: bool = False) -> float:
        return prufer_angle(problem, lam, bc, rtol, stop=n + 1 if fast else None) - target

    est = _weyl_estimate(problem, n)
    step = max(1.0, 0.25 * abs(est))
    lo, hi = est - step, est + step
    for _ in range(200):
        if gap(lo, fast=True) < 0:
            break
        hi, lo, step = lo, lo - step, 2 * step
    else:
        raise BracketFailure(f"no lower bracket for index {n}")
    for _ in range(200):
        if gap(hi, fast=True) > 0:
            break
        lo, hi, step = hi, hi + step, 2 * step
    else:
        raise BracketFailure(f"no upper bracket for index {n}")

    xtol = 0.01 * tol
    lam = optimize.brentq(gap, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)

    traj = _shoot(problem, lam, bc, rtol)
    norm2 = _weighted_norm2(traj, problem)
    ef = traj.scaled(1.0 / math.sqrt(norm2))
    _, u, v, lg = ef.end_state()
    residual = abs(bc.right_functional(u, v) * math.exp(lg))
    # a loose tol can leave lam just past the root, moving a zero to within
    # O(tol) of b; such a zero belongs to the endpoint
    ztol = (problem.b - problem.a) * max(1e-9, math.sqrt(tol))
    zeros = count_zeros(ef, (problem.a, problem.b), open=True, ztol=ztol)
    if zeros != n - 1:
        raise BracketFailure(f"eigenfunction {n} has {zeros} interior zeros, expected {n - 1}")
    return EigenResult(n, float(lam), bc, ef, residual, zeros)


def eigenvalues(
    problem: SLProblem, indices: Sequence[int], bc: BoundaryCondition = DIRICHLET, tol: float = 1e-8
) -> list[EigenResult]:
    return [eigenvalue(problem, n, bc, tol) for n in indices]


# ---------------------------------------------------------------------------
# quadrature of the form


def _cells(problem: SLProblem, lo: float, hi: float, extra=(), n_uniform: int = 64) -> np.ndarray:
    pts = [lo, hi, *np.linspace(lo, hi, n_uniform + 1)]
    pts += [x for x in extra if lo < x < hi]
    pts += [x for x in problem.breakpoints() if lo < x < hi]
    return np.unique(np.asarray(pts, dtype=float))


def _weighted_norm2(traj: SolutionTrajectory, problem: SLProblem) -> float:
    grid = _cells(problem, traj.x_min, traj.x_max, traj.node_x(), n_uniform=0)
    pts, wts = gauss_cells(grid[:-1], grid[1:])
    u, _ = traj.evaluate(pts.ravel())
    return float(np.sum(wts.ravel() * problem.r.values(pts.ravel()) * u * u))


def _sample_function(problem: SLProblem, f, lo: float, hi: float):
    """(points, weights, f, f1) on Gauss cells over [lo, hi]."""
    if isinstance(f, SolutionTrajectory):
        grid = _cells(problem, lo, hi, f.node_x(), n_uniform=0)
    else:
        grid = _cells(problem, lo, hi, f.knots)
    pts, wts = gauss_cells(grid[:-1], grid[1:])
    xs = pts.ravel()
    if isinstance(f, SolutionTrajectory):
        fu, f1 = f.evaluate(xs)
    else:
        fu = f.values(xs)
        f1 = problem.p.values(xs) * (f.slopes(xs) + problem.s.values(xs) * fu)
    return xs, wts.ravel(), fu, f1


def _range_of(problem: SLProblem, f) -> tuple[float, float]:
    if isinstance(f, SolutionTrajectory):
        if not (f.covers(problem.a, 1e-12) and f.covers(problem.b, 1e-12)):
            raise PreconditionError("trajectory must cover the whole interval")
        return problem.a, problem.b
    lo, hi = f.support
    if lo < problem.a - 1e-12 or hi > problem.b + 1e-12:
        raise PreconditionError(f"support {f.support} leaves ({problem.a}, {problem.b})")
    return max(lo, problem.a), min(hi, problem.b)


def _check_boundary(problem: SLProblem, f, lo: float, hi: float, scale: float) -> None:
    ends = [x for x in (problem.a, problem.b) if math.isfinite(x) and lo <= x <= hi]
    if not ends:
        return
    if isinstance(f, SolutionTrajectory):
        vals, _ = f.evaluate(np.array(ends))
    else:
        vals = f.values(np.array(ends))
    if np.any(np.abs(vals) > BOUNDARY_TOL * max(scale, 1e-300)):
        raise BoundaryViolation(f"f does not vanish at the endpoints: {list(map(float, vals))}")


def form_values(problem: SLProblem, f) -> tuple[float, float]:
    """(Q_F(f, f), ||f||_r^2) with Q_F(f, f) = int p^-1 |f1|^2 + q |f|^2."""
    lo, hi = _range_of(problem, f)
    xs, w, fu, f1 = _sample_function(problem, f, lo, hi)
    _check_boundary(problem, f, lo, hi, float(np.max(np.abs(fu))) if len(fu) else 0.0)
    p, q, r = problem.p.values(xs), problem.q.values(xs), problem.r.values(xs)
    form = float(np.sum(w * (f1 * f1 / p + q * fu * fu)))
    norm2 = float(np.sum(w * r * fu * fu))
    return form, norm2


def rayleigh_quotient(problem: SLProblem, f) -> float:
    """Q_F(f, f) / ||f||_r^2 for a trajectory or a test function vanishing at a and b.

    The form uses the quasi-derivative, p^-1 |f1|^2, so s enters only
    through f1.  Test functions are integrated with 8-point Gauss rules on
    cells split at their knots and at coefficient breakpoints.
    """
    form, norm2 = form_values(problem, f)
    if norm2 <= 0.0:
        raise PreconditionError("f vanishes identically")
    return form / norm2


# ---------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class MonotonicityRow:
    interval: tuple[float, float]
    lam: float


@dataclass(frozen=True)
class MonotonicityResult:
    rows: tuple[MonotonicityRow, ...]
    strict: bool
    margins: tuple[float, ...]


def _check_nested(intervals: Sequence[tuple[float, float]]) -> None:
    if len(intervals) < 2:
        raise PreconditionError("need at least two intervals")
    for (c0, d0), (c1, d1) in zip(intervals, intervals[1:]):
        if not (c0 <= c1 < d1 <= d0) or (c0 == c1 and d0 == d1):
            raise PreconditionError(f"({c1}, {d1}) is not strictly contained in ({c0}, {d0})")


def monotonicity_experiment(
    problem: SLProblem,
    intervals: Sequence[tuple[float, float]],
    bc: BoundaryCondition = DIRICHLET,
    tol: float = 1e-8,
) -> MonotonicityResult:
    """lambda_1 on each of a strictly nested list of subintervals.

    Raises :class:`MonotonicityViolation` unless lambda_1 increases by more
    than 10 tol at each step.
    """
    intervals = [(float(c), float(d)) for c, d in intervals]
    _check_nested(intervals)
    rows = []
    for c, d in intervals:
        sub = problem.restrict(c, d)
        rows.append(MonotonicityRow((c, d), eigenvalue(sub, 1, bc, tol).lam))
    margins = tuple(b.lam - a.lam for a, b in zip(rows, rows[1:]))
    for m, row in zip(margins, rows[1:]):
        if not m > 10 * tol:
            raise MonotonicityViolation(
                f"lambda_1 on {row.interval} exceeds the enclosing value by only {m:.3e}"
            )
    return MonotonicityResult(tuple(rows), True, margins)


@dataclass(frozen=True)
class MinimizerVerdict:
    verdict: str  # "eigenpair", "strict excess" or "below lambda_1"
    mu: float
    residual: float
    lambda1: float
    index: int | None = None


def eigen_residual(problem: SLProblem, f, mu: float, h_rel: float = 1e-4) -> float:
    """||tau f - mu f||_r / ||f||_r with (f1)' by centered differences.

    Differences stay inside the Gauss cells, so kinks of f and coefficient
    jumps are never straddled.
    """
    lo, hi = _range_of(problem, f)
    if isinstance(f, SolutionTrajectory):
        grid = _cells(problem, lo, hi, f.node_x(), n_uniform=0)
    else:
        grid = _cells(problem, lo, hi, f.knots)
    pts, wts = gauss_cells(grid[:-1], grid[1:])
    h = (h_rel * (grid[1:] - grid[:-1]))[:, None] * np.ones_like(pts)
    xs, hs, w = pts.ravel(), h.ravel(), wts.ravel()

    def quasi(x):
        if isinstance(f, SolutionTrajectory):
            return f.evaluate(x)
        fu = f.values(x)
        return fu, problem.p.values(x) * (f.slopes(x) + problem.s.values(x) * fu)

    fu, f1 = quasi(xs)
    # coefficient values from the cell's own piece
    _, f1p = quasi(xs + hs)
    _, f1m = quasi(xs - hs)
    df1 = (f1p - f1m) / (2 * hs)
    q, r, s = problem.q.values(xs), problem.r.values(xs), problem.s.values(xs)
    tau_f = (-df1 + s * f1 + q * fu) / r
    res = tau_f - mu * fu
    num = float(np.sum(w * r * res * res))
    den = float(np.sum(w * r * fu * fu))
    return math.sqrt(num / den)


def minimizer_check(
    problem: SLProblem,
    f,
    mu: float,
    tol: float = 1e-6,
    bc: BoundaryCondition = DIRICHLET,
    max_index: int = 50,
) -> MinimizerVerdict:
    """Is (mu, f) a Dirichlet eigenpair, or does mu strictly exceed lambda_1?

    "eigenpair" needs the eigen-residual below ``tol`` and mu within
    ``tol (1 + |mu|)`` of some eigenvalue lambda_k (``index`` = k).
    """
    lo, hi = _range_of(problem, f)
    xs, _, fu, _ = _sample_function(problem, f, lo, hi)
    _check_boundary(problem, f, lo, hi, float(np.max(np.abs(fu))))
    lam1 = eigenvalue(problem, 1, bc).lam
    res = eigen_residual(problem, f, mu)
    mtol = tol * (1.0 + abs(mu))
    if res <= tol:
        k = 1
        lam_k = lam1
        while lam_k < mu - mtol and k < max_index:
            k += 1
            lam_k = eigenvalue(problem, k, bc).lam
        if abs(lam_k - mu) <= mtol:
            return MinimizerVerdict("eigenpair", mu, res, lam1, k)
    if mu > lam1 + mtol:
        return MinimizerVerdict("strict excess", mu, res, lam1)
    return MinimizerVerdict("below lambda_1", mu, res, lam1)


__all__ = [
    "BoundaryCondition",
    "DIRICHLET",
    "NEUMANN",
    "EigenResult",
    "MinimizerVerdict",
    "MonotonicityResult",
    "MonotonicityRow",
    "TestFunction",
    "eigen_residual",
    "eigenvalue",
    "eigenvalues",
    "form_values",
    "minimizer_check",
    "monotonicity_experiment",
    "prufer_angle",
    "rayleigh_quotient",
    "shoot_mismatch",
]
