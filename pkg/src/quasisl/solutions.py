"""Principal solution pairs, plus disconjugacy tests with positive witnesses.

Conventions.  A pair (u, u_hat) at an endpoint is normalized so that
W(u_hat, u) = 1 with u_hat positive near the endpoint.  At a regular
endpoint e this is the pair with (u, u1)(e) = (0, 1) and
(u_hat, u_hat1)(e) = (1, 0), so the generalized boundary values

    g~(e)  = -W(u, g)(e)
    g~'(e) =  W(u_hat, g)(e)

are the plain boundary values g(e) and g1(e).  The principal solution is
then positive near a and negative near b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .coefficients import (
    QuadratureConfig,
    SLProblem,
    TruncationConfig,
    diverges,
    endpoint_is_regular,
    limit_point_test,
    nonoscillatory_beyond,
)
from .errors import (
    DivergentConstruction,
    LimitPointEndpoint,
    NonConvergentLimit,
    NumericallyDegenerate,
    Oscillatory,
    OscillatoryWitness,
    OutOfRange,
    PreconditionError,
    VanishingNearEndpoint,
)
from .quasi_ode import (
    IVPSpec,
    SolutionTrajectory,
    cell_grid,
    count_zeros,
    integrate_ivp,
    reciprocal_integrals,
    wronskian,
)

PRINCIPAL = "principal"
NONPRINCIPAL = "nonprincipal"
UNDETERMINED = "undetermined"


def _check_endpoint(endpoint: str) -> str:
    if endpoint not in ("a", "b"):
        raise PreconditionError(f"endpoint must be 'a' or 'b', got {endpoint!r}")
    return endpoint


def _side(endpoint: str) -> float:
    return 1.0 if endpoint == "b" else -1.0


@dataclass(frozen=True)
class PrincipalPair:
    """Principal ``u`` and nonprincipal ``u_hat`` at one endpoint, W(u_hat, u) = 1.

    ``cutoffs`` are the truncation points (ordered toward the endpoint)
    covered by both trajectories.  ``base`` and ``x0`` record the
    reduction-of-order construction when one was used.
    """

    principal: SolutionTrajectory
    nonprincipal: SolutionTrajectory
    endpoint: str
    lam: float
    normalization: float
    cutoffs: tuple[float, ...]
    base: SolutionTrajectory | None = None
    x0: float | None = None

    def wronskian(self, x):
        return wronskian(self.nonprincipal, self.principal, x)

    def ratios(self) -> np.ndarray:
        """|u / u_hat| at the cutoffs; tends to 0 toward the endpoint."""
        xs = np.asarray(self.cutoffs, dtype=float)
        u, _, lu = self.principal.evaluate_scaled(xs)
        w, _, lw = self.nonprincipal.evaluate_scaled(xs)
        return np.abs(u / w) * np.exp(lu - lw)


# ---------------------------------------------------------------------------
# principal pairs


def _regular_pair(problem: SLProblem, lam: float, endpoint: str, truncation: TruncationConfig) -> PrincipalPair:
    e = problem.interval.endpoint(endpoint)
    other = problem.interval.endpoint("a" if endpoint == "b" else "b")
    target = other if problem.evaluable_at(other) else truncation.anchor_for(problem.interval)
    principal = integrate_ivp(problem, IVPSpec(x0=e, u0=0.0, u1_0=1.0, lam=lam, target=target))
    nonprincipal = integrate_ivp(problem, IVPSpec(x0=e, u0=1.0, u1_0=0.0, lam=lam, target=target))
    lo, hi = sorted((e, target))
    cuts = tuple(x for x in truncation.cutoffs(problem.interval, endpoint) if lo <= x <= hi)
    return PrincipalPair(principal, nonprincipal, endpoint, lam, 1.0, cuts)


def _tail_estimate(d: Sequence[float]) -> float | None:
    """Aitken remainder of a series with geometrically shrinking increments ``d``.

    Returns None when the increments are not shrinking.
    """
    d1, d2 = d[-2], d[-1]
    if d2 == 0.0:
        return 0.0
    if not (0.0 < d2 < d1):
        return None
    return d2 * d2 / (d1 - d2)


def _log_weight(traj: SolutionTrajectory, x: float) -> float:
    u, _, lg = traj.evaluate_scaled(x)
    return -2.0 * (lg[0] + math.log(abs(u[0]))) - math.log(traj.problem.p(x))


def _local_tail(traj: SolutionTrajectory, far: float, prev: float, origin: float) -> float | None:
    """Remainder of int 1/(p u^2) beyond ``far`` toward infinity.

    With w the integrand and kappa = -(log w)' at ``far``, the estimate
    w / (kappa - 1/L), L = |far - origin|, is exact for w ~ exp(-k x) up to
    O(1/(k L)) and exact for w ~ x**-k.  None when w does not decay fast
    enough for the estimate to apply.
    """
    eta = 1e-3 * abs(far - prev)
    back = far - math.copysign(eta, far - prev)
    lw = _log_weight(traj, far)
    kappa = (_log_weight(traj, back) - lw) / eta
    rate = kappa - 1.0 / abs(far - origin)
    if not (rate > 0 and math.isfinite(rate)):
        return None
    return math.exp(lw) / rate


def _reduction_pair(problem: SLProblem, lam: float, endpoint: str, truncation: TruncationConfig) -> PrincipalPair:
    side = _side(endpoint)
    x_anchor = truncation.anchor_for(problem.interval)
    cuts = truncation.cutoffs(problem.interval, endpoint)
    base = integrate_ivp(problem, IVPSpec(x0=x_anchor, u0=1.0, u1_0=0.0, lam=lam, target=cuts[-1]))
    if not nonoscillatory_beyond(base, [x_anchor, *cuts]):
        raise Oscillatory(f"zeros accumulate toward endpoint {endpoint} at lambda = {lam}")

    zs = base.zero_locations()
    c = x_anchor
    if zs:
        last = max(zs) if side > 0 else min(zs)
        beyond = [t for t in cuts if side * (t - last) > 0]
        if len(beyond) < 5:
            raise Oscillatory(f"solution still vanishes near endpoint {endpoint}; extend the truncation")
        c = beyond[0]
    used = [t for t in cuts if side * (t - c) > 0]
    if len(used) < 4:
        raise DivergentConstruction("too few truncation levels beyond the last zero")
    if base.u(c)[0] < 0:
        base = base.scaled(-1.0)

    far = used[-1]
    lo, hi = sorted((c, far))
    grid = cell_grid(base, lo, hi, extra=used)
    cells = reciprocal_integrals(base, grid)
    if not np.all(np.isfinite(cells)):
        raise DivergentConstruction("reciprocal integrand is not finite on the truncation range")
    # forward and reverse cumulative sums keep each integral accurate where it is small
    fwd = np.concatenate([[0.0], np.cumsum(cells)])
    rev = np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]])
    idx = [int(np.searchsorted(grid, t)) for t in used]
    if side > 0:
        inner, outer_part = fwd, rev  # int_c^x and int_x^far
        partial = [fwd[i] for i in idx]
    else:
        inner, outer_part = rev, fwd  # int_x^c and int_far^x
        partial = [rev[i] for i in idx]
    # increments between cutoffs from the reverse sums, which are exact where small
    tails = [outer_part[int(np.searchsorted(grid, c))]] + [outer_part[i] for i in idx]
    incr = -np.diff(tails)

    u, v = base.evaluate(grid)
    hat_u = u * inner
    hat_v = v * inner + side / u
    if diverges(partial, QuadratureConfig().growth):
        # the base itself is principal: W(hat, base) = -side
        prin_u, prin_v = -side * u, -side * v
    else:
        if math.isfinite(problem.interval.endpoint(endpoint)):
            tail = _tail_estimate(incr)
        else:
            origin = problem.interval.endpoint("a" if endpoint == "b" else "b")
            origin = origin if math.isfinite(origin) else 0.0
            tail = _local_tail(base, far, used[-2], origin)
        if tail is None:
            raise DivergentConstruction(
                f"truncated integrals toward {endpoint} neither converge nor diverge clearly"
            )
        outer = outer_part + tail
        total = partial[-1] + tail
        # W(hat, u * outer) = -side * total
        norm = -side * total
        prin_u = u * outer / norm
        prin_v = (v * outer - side / u) / norm
    principal = SolutionTrajectory.from_nodes(problem, lam, grid, prin_u, prin_v)
    nonprincipal = SolutionTrajectory.from_nodes(problem, lam, grid, hat_u, hat_v)
    ordered = tuple(sorted(used, key=lambda t: side * t))
    return PrincipalPair(principal, nonprincipal, endpoint, lam, 1.0, ordered, base=base, x0=c)


def principal_pair(
    problem: SLProblem,
    lam: float,
    endpoint: str,
    truncation: TruncationConfig | None = None,
) -> PrincipalPair:
    """Principal/nonprincipal pair at ``endpoint`` normalized to W(u_hat, u) = 1.

    Regular endpoints where the coefficients are finite use initial values
    at the endpoint.  Otherwise a nonvanishing base solution u is
    integrated toward the endpoint and the pair is built by reduction of
    order: u_hat = u * int_{x0}^x dt/(p u^2) and the principal solution
    u * int_x^e dt/(p u^2), the improper integral closed by an Aitken tail
    estimate over the truncation sequence.
    """
    endpoint = _check_endpoint(endpoint)
    truncation = truncation or TruncationConfig()
    e = problem.interval.endpoint(endpoint)
    if problem.evaluable_at(e) and endpoint_is_regular(problem, endpoint):
        return _regular_pair(problem, lam, endpoint, truncation)
    return _reduction_pair(problem, lam, endpoint, truncation)


def is_principal(
    problem: SLProblem,
    u: SolutionTrajectory,
    endpoint: str,
    truncation: TruncationConfig | None = None,
    growth: float = 1.5,
) -> str:
    """Classify ``u`` at ``endpoint`` by the integral of 1/(p u^2) toward it.

    Divergent: principal.  Convergent: nonprincipal.  Otherwise undetermined.
    Only truncation cutoffs covered by ``u`` are used (at least four).
    """
    endpoint = _check_endpoint(endpoint)
    truncation = truncation or TruncationConfig()
    side = _side(endpoint)
    cuts = [t for t in truncation.cutoffs(problem.interval, endpoint) if u.covers(t)]
    if len(cuts) < 4:
        raise OutOfRange(f"trajectory covers fewer than four cutoffs toward {endpoint}")
    start = cuts[0]
    e = problem.interval.endpoint(endpoint)
    etol = 1e-9 * max(1.0, abs(e)) if math.isfinite(e) else 0.0
    zs = [z for z in u.zero_locations() if side * (z - start) >= 0 and abs(z - e) > etol]
    if zs:
        raise VanishingNearEndpoint(f"solution vanishes at {zs[0]} near endpoint {endpoint}")
    lo, hi = sorted((start, cuts[-1]))
    grid = cell_grid(u, lo, hi, extra=cuts)
    cells = reciprocal_integrals(u, grid)
    if not np.all(np.isfinite(cells)):
        return PRINCIPAL
    fwd = np.concatenate([[0.0], np.cumsum(cells)])
    rev = np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]])
    idx = [int(np.searchsorted(grid, t)) for t in cuts]
    if side > 0:
        partial = [fwd[i] for i in idx[1:]]
        remaining = [rev[i] for i in idx]
    else:
        partial = [rev[i] for i in idx[1:]]
        remaining = [fwd[i] for i in idx]
    if diverges(partial, growth):
        return PRINCIPAL
    incr = -np.diff(remaining)
    if incr[-1] == 0.0 or (_tail_estimate(incr) is not None and incr[-1] <= 0.5 * incr[-2]):
        return NONPRINCIPAL
    return UNDETERMINED


# ---------------------------------------------------------------------------
# disconjugacy and positive solutions


@dataclass(frozen=True)
class DisconjugacyResult:
    disconjugate: bool
    lam: float
    interval: tuple[float, float]
    trajectory: SolutionTrajectory
    zeros: tuple[float, float] | None = None
    positive: SolutionTrajectory | None = None

    def __bool__(self) -> bool:
        return self.disconjugate


def working_problem(problem: SLProblem, truncation: TruncationConfig | None = None) -> SLProblem:
    """The problem itself when both ends can be integrated from, else its
    restriction to the outermost truncation interval."""
    c, d = problem.a, problem.b
    if problem.evaluable_at(c) and problem.evaluable_at(d):
        return problem
    truncation = truncation or TruncationConfig()
    if not problem.evaluable_at(c):
        c = truncation.cutoffs(problem.interval, "a")[-1]
    if not problem.evaluable_at(d):
        d = truncation.cutoffs(problem.interval, "b")[-1]
    return problem.restrict(c, d)


def disconjugacy_check(
    problem: SLProblem,
    lam: float,
    truncation: TruncationConfig | None = None,
    witness: bool = True,
    ztol: float | None = None,
    rtol: float = 1e-10,
) -> DisconjugacyResult:
    """Is tau - lam disconjugate on the open interval?

    The solution with (u, u1) = (0, 1) at the left end is integrated until
    its first zero.  A zero within ``ztol`` (default 1e-9 (b - a)) of the
    right end does not count, so lam = lambda_1 itself is disconjugate.
    With ``witness`` a positive solution is attached when disconjugate;
    otherwise the two zeros of the violating solution are reported.
    """
    work = working_problem(problem, truncation)
    a, b = work.a, work.b
    ztol = 1e-9 * (b - a) if ztol is None else ztol
    traj = integrate_ivp(work, IVPSpec(x0=a, u0=0.0, u1_0=1.0, lam=lam, target=b, rtol=rtol), stop_after_zeros=1)
    inner = [z for z in traj.zero_locations() if a + ztol < z < b - ztol]
    if inner:
        return DisconjugacyResult(False, lam, (a, b), traj, zeros=(a, inner[0]))
    pos = positive_solution(work, lam, _checked=traj, ztol=ztol) if witness else None
    return DisconjugacyResult(True, lam, (a, b), traj, positive=pos)


def _positive_on(u: np.ndarray, du_end: float, ztol: float) -> bool:
    """Grid values strictly positive inside, and the right end not below a zero."""
    if not np.all(u[1:-1] > 0):
        return False
    end = u[-1]
    return end > 0 or (du_end != 0 and abs(end / du_end) <= ztol)


def positive_solution(
    problem: SLProblem,
    lam: float,
    truncation: TruncationConfig | None = None,
    ztol: float | None = None,
    n_check: int = 2001,
    _checked: SolutionTrajectory | None = None,
) -> SolutionTrajectory | None:
    """A solution of (tau - lam) u = 0 positive on the open interval, or None.

    Tries the data (eps, 1) at a, eps = 1e-6 (b - a) / p(a), first.  If that
    fails, bisects for the smallest angle theta in (-pi/2, pi/2] such that
    cos(theta) u_(1,0) + sin(theta) u_(0,1) stays positive (the admissible
    angles form an interval ending at pi/2) and returns the solution at the
    midpoint of that interval, or at pi/2 when the interval is a point.
    """
    work = working_problem(problem, truncation)
    a, b = work.a, work.b
    ztol = 1e-9 * (b - a) if ztol is None else ztol
    if _checked is None:
        chk = disconjugacy_check(work, lam, witness=False, ztol=ztol)
        if not chk.disconjugate:
            return None

    p_a = work.p.limit(a, "right")
    eps = 1e-6 * (b - a) / p_a
    cand = integrate_ivp(work, IVPSpec(x0=a, u0=eps, u1_0=1.0, lam=lam, target=b))
    xs = np.unique(np.concatenate([np.linspace(a, b, n_check), cand.node_x()]))
    if _accept(cand, xs, ztol):
        return cand

    s_tr = integrate_ivp(work, IVPSpec(x0=a, u0=0.0, u1_0=1.0, lam=lam, target=b))
    c_tr = integrate_ivp(work, IVPSpec(x0=a, u0=1.0, u1_0=0.0, lam=lam, target=b))
    xs = np.unique(np.concatenate([np.linspace(a, b, n_check), s_tr.node_x(), c_tr.node_x()]))
    su, _ = s_tr.evaluate(xs)
    cu, _ = c_tr.evaluate(xs)
    sd, _ = s_tr.derivative(b)
    cd, _ = c_tr.derivative(b)

    def ok(theta: float) -> bool:
        ct, st = math.cos(theta), math.sin(theta)
        return _positive_on(ct * cu + st * su, ct * cd[0] + st * sd[0], ztol)

    hi = 0.5 * math.pi
    if not ok(hi):
        raise NumericallyDegenerate(
            f"disconjugate at lambda = {lam} but no solution is positive on the check grid"
        )
    lo = -0.5 * math.pi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-12:
            break
    theta = 0.5 * (hi + 0.5 * math.pi)
    if 0.5 * math.pi - hi < 1e-7:
        theta = 0.5 * math.pi
    sol = integrate_ivp(work, IVPSpec(x0=a, u0=math.cos(theta), u1_0=math.sin(theta), lam=lam, target=b))
    if not _accept(sol, xs, ztol):
        raise NumericallyDegenerate(f"positivity at lambda = {lam} holds only within noise of zero")
    return sol


def _accept(traj: SolutionTrajectory, xs: np.ndarray, ztol: float) -> bool:
    if count_zeros(traj, (traj.x_min, traj.x_max), open=True, ztol=ztol) > 0:
        return False
    u, _ = traj.evaluate(xs)
    du, _ = traj.derivative(traj.x_max)
    return _positive_on(u, du[0], ztol)


# ---------------------------------------------------------------------------
# generalized boundary values


@dataclass(frozen=True)
class GeneralizedBoundaryValues:
    g_tilde_a: float
    g_tilde_prime_a: float
    g_tilde_b: float
    g_tilde_prime_b: float

    def as_dict(self) -> dict[str, float]:
        return {
            "g_tilde_a": self.g_tilde_a,
            "g_tilde_prime_a": self.g_tilde_prime_a,
            "g_tilde_b": self.g_tilde_b,
            "g_tilde_prime_b": self.g_tilde_prime_b,
        }


def quasi_values(problem: SLProblem, g, xs) -> tuple[np.ndarray, np.ndarray]:
    """(g, g1) at ``xs`` for a trajectory or a test function."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if isinstance(g, SolutionTrajectory):
        return g.evaluate(xs)
    f = g.values(xs)
    df = g.slopes(xs)
    return f, problem.p.values(xs) * (df + problem.s.values(xs) * f)


def _wronskian_with(pair_traj: SolutionTrajectory, problem: SLProblem, g, xs) -> np.ndarray:
    u, v = pair_traj.evaluate(xs)
    gu, gv = quasi_values(problem, g, xs)
    return u * gv - v * gu


def _richardson(vals: Sequence[float], ratio: float) -> float:
    """Eliminate O(h) and O(h^2) terms from values at h, h*ratio, h*ratio^2."""
    v0, v1, v2 = vals[-3:]
    w1 = (v1 - ratio * v0) / (1 - ratio)
    w2 = (v2 - ratio * v1) / (1 - ratio)
    r2 = ratio * ratio
    return (w2 - r2 * w1) / (1 - r2)


def _aitken(vals: Sequence[float]) -> float:
    v0, v1, v2 = vals[-3:]
    den = v2 - 2 * v1 + v0
    if den == 0.0 or abs(den) < 1e-14 * max(abs(v0), abs(v1), abs(v2), 1e-300):
        return v2
    return v2 - (v2 - v1) ** 2 / den


def _endpoint_values(problem, g, pair: PrincipalPair, truncation, cross_tol) -> tuple[float, float]:
    endpoint = pair.endpoint
    e = problem.interval.endpoint(endpoint)
    direct = pair.base is None and problem.evaluable_at(e)
    if direct:
        g_t = -_wronskian_with(pair.principal, problem, g, e)[0]
        g_tp = _wronskian_with(pair.nonprincipal, problem, g, e)[0]
        cuts = list(truncation.cutoffs(problem.interval, endpoint))[:4]
        extrap = lambda vals: _richardson(vals, truncation.ratio)  # noqa: E731
    else:
        cuts = list(pair.cutoffs)
        if len(cuts) < 3:
            raise NonConvergentLimit(f"too few cutoffs toward {endpoint}")
        g_t = _aitken(list(-_wronskian_with(pair.principal, problem, g, cuts)))
        g_tp = _aitken(list(_wronskian_with(pair.nonprincipal, problem, g, cuts)))
        extrap = _aitken
    # ratio formulas: g / u_hat -> g~ and (g - g~ u_hat) / u -> g~'
    xs = np.asarray(cuts[-3:] if not direct else cuts[1:4], dtype=float)
    gu, _ = quasi_values(problem, g, xs)
    uh, _ = pair.nonprincipal.evaluate(xs)
    up, _ = pair.principal.evaluate(xs)
    r1 = extrap(list(gu / uh))
    r2 = extrap(list((gu - g_t * uh) / up))
    for name, w, r in (("g~", g_t, r1), ("g~'", g_tp, r2)):
        if abs(w - r) > cross_tol * (1.0 + abs(w)):
            raise NonConvergentLimit(
                f"{name}({endpoint}): Wronskian limit {w!r} and ratio limit {r!r} disagree"
            )
    return float(g_t), float(g_tp)


def generalized_boundary_values(
    problem: SLProblem,
    g,
    lambda0: float,
    pair_a: PrincipalPair | None = None,
    pair_b: PrincipalPair | None = None,
    truncation: TruncationConfig | None = None,
    cross_tol: float = 1e-5,
) -> GeneralizedBoundaryValues:
    """Wronskian boundary values g~ = -W(u_e, g), g~' = W(u_hat_e, g) at a and b.

    ``g`` is a trajectory or a test function (with ``values``/``slopes``).
    Limits at singular endpoints come from Aitken extrapolation over the
    truncation cutoffs; at regular endpoints the Wronskians are evaluated
    at the endpoint.  Both are cross-checked against the ratio limits of
    g / u_hat and (g - g~ u_hat) / u.  Limit-point endpoints are refused.
    """
    truncation = truncation or TruncationConfig()
    out = []
    for endpoint, pair in (("a", pair_a), ("b", pair_b)):
        if not endpoint_is_regular(problem, endpoint):
            try:
                verdict = limit_point_test(problem, endpoint, lambda0, truncation=truncation)
            except OscillatoryWitness as exc:
                raise Oscillatory(str(exc)) from exc
            if verdict == "limit-point":
                raise LimitPointEndpoint(f"endpoint {endpoint} is limit point; boundary values are not defined")
        if pair is None:
            pair = principal_pair(problem, lambda0, endpoint, truncation)
        elif pair.endpoint != endpoint or pair.lam != lambda0:
            raise PreconditionError(f"pair for {endpoint} does not match (endpoint, lambda0)")
        out.extend(_endpoint_values(problem, g, pair, truncation, cross_tol))
    return GeneralizedBoundaryValues(*out)
