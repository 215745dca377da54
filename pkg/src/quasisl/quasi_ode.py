"""Integration of the first-order quasi-derivative system.

For (tau - lam) u = g the pair (u, u1), u1 = p (u' + s u), satisfies

    u'  = u1 / p - s u
    u1' = s u1 + (q - lam r) u - r g

Both components are absolutely continuous even where s or q jump, so the
system is integrated segment by segment between coefficient breakpoints
with an embedded Dormand-Prince 5(4) pair.  Each accepted step keeps
first and second derivatives at both ends (the second from the
differentiated system), giving a quintic Hermite dense output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .coefficients import Coefficient, SLProblem
from .errors import (
    EndpointSingular,
    InternalConsistencyError,
    OutOfRange,
    PreconditionError,
    StepSizeUnderflow,
    VanishingBase,
)

RESCALE_ABOVE = 1e100
RESCALE_BELOW = 1e-100

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


@dataclass(frozen=True)
class QuasiState:
    x: float
    u: float
    u1: float


@dataclass(frozen=True)
class Zero:
    x: float
    sign: int  # +1 when u crosses from negative to positive in increasing x


@dataclass(frozen=True)
class IVPSpec:
    """Initial-value data for (tau - lam) u = g at ``x0``.

    ``rtol`` bounds the local error relative to each component; ``atol``
    is an absolute floor measured against the running amplitude of the
    solution, so it stays meaningful after renormalization.
    """

    x0: float
    u0: float
    u1_0: float
    lam: float
    target: float
    g: Coefficient | None = None
    rtol: float = 1e-10
    atol: float = 1e-10
    max_step: float = math.inf

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise PreconditionError("tolerances must be positive")
        if self.g is None and self.u0 == 0.0 and self.u1_0 == 0.0:
            raise PreconditionError("initial data (0, 0) gives the trivial solution")


def _hermite(t, h, y0, y1, f0, f1, s0=None, s1=None):
    """Quintic Hermite interpolant on [0, 1] (values, slopes, curvatures).

    With ``s0``/``s1`` omitted the end curvatures of the cubic Hermite
    interpolant are used, which reproduces that cubic exactly.
    """
    if s0 is None:
        s0, s1 = _cubic_curvatures(h, y0, y1, f0, f1)
    t2 = t * t
    t3 = t2 * t
    t4 = t3 * t
    t5 = t4 * t
    h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5
    h1 = t - 6 * t3 + 8 * t4 - 3 * t5
    h2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5)
    h3 = 0.5 * t3 - t4 + 0.5 * t5
    h4 = -4 * t3 + 7 * t4 - 3 * t5
    h5 = 10 * t3 - 15 * t4 + 6 * t5
    return h0 * y0 + h * (h1 * f0 + h4 * f1) + h * h * (h2 * s0 + h3 * s1) + h5 * y1


def _hermite_deriv(t, h, y0, y1, f0, f1, s0=None, s1=None):
    if s0 is None:
        s0, s1 = _cubic_curvatures(h, y0, y1, f0, f1)
    t2 = t * t
    t3 = t2 * t
    t4 = t3 * t
    d0 = -30 * t2 + 60 * t3 - 30 * t4
    d1 = 1 - 18 * t2 + 32 * t3 - 15 * t4
    d2 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4)
    d3 = 1.5 * t2 - 4 * t3 + 2.5 * t4
    d4 = -12 * t2 + 28 * t3 - 15 * t4
    d5 = 30 * t2 - 60 * t3 + 30 * t4
    return (d0 * y0 + d5 * y1) / h + d1 * f0 + d4 * f1 + h * (d2 * s0 + d3 * s1)


def _cubic_curvatures(h, y0, y1, f0, f1):
    s0 = (6 * (y1 - y0) - h * (4 * f0 + 2 * f1)) / (h * h)
    s1 = (6 * (y0 - y1) + h * (2 * f0 + 4 * f1)) / (h * h)
    return s0, s1


def _curvature(pt, qt, rt, st, gt, lam, x, u, v, fu, fv):
    """Second derivatives (u'', u1'') of the system at x, or NaNs."""
    try:
        pv, sv = pt(x), st(x)
        dp, ds = pt.derivative(x), st.derivative(x)
        dq, dr = qt.derivative(x), rt.derivative(x)
        su = fv / pv - dp * v / (pv * pv) - ds * u - sv * fu
        sv2 = ds * v + sv * fv + (dq - lam * dr) * u + (qt(x) - lam * rt(x)) * fu
        if gt is not None:
            sv2 -= dr * gt(x) + rt(x) * gt.derivative(x)
    except (ArithmeticError, ValueError):
        return math.nan, math.nan
    if not (math.isfinite(su) and math.isfinite(sv2)):
        return math.nan, math.nan
    return su, sv2


def _refine_zero(h, y0, y1, f0, f1, s0=None, s1=None) -> float:
    """Root in (0, 1) of the dense-output polynomial for u; y0*y1 < 0.

    Bisection followed by one Newton step kept inside the final bracket.
    """
    lo, hi = 0.0, 1.0
    v_lo = y0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        v = _hermite(mid, h, y0, y1, f0, f1, s0, s1)
        if v == 0.0:
            return mid
        if (v < 0) == (v_lo < 0):
            lo, v_lo = mid, v
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    t = 0.5 * (lo + hi)
    d = _hermite_deriv(t, h, y0, y1, f0, f1, s0, s1) * h
    if d != 0.0:
        t_new = t - _hermite(t, h, y0, y1, f0, f1, s0, s1) / d
        if lo <= t_new <= hi:
            t = t_new
    return t


def _fill_curvatures(xa, xb, ya, yb, fa, fb, sa, sb):
    """Replace missing (NaN) curvatures by those of the cubic interpolant."""
    h = xb - xa
    bad = ~(np.isfinite(sa) & np.isfinite(sb))
    if np.any(bad):
        c0, c1 = _cubic_curvatures(h, ya, yb, fa, fb)
        sa = np.where(bad, c0, sa)
        sb = np.where(bad, c1, sb)
    return sa, sb


class SolutionTrajectory:
    """Dense-output solution of (tau - lam) u = g.

    Steps are stored in increasing x regardless of the integration
    direction.  Inside step i the stored values are in a local scale; the
    true value is the stored value times ``exp(step_log[i])``.  Each step
    carries values with their first two derivatives at both ends (quintic Hermite).
    """

    def __init__(
        self,
        problem: SLProblem,
        lam: float,
        direction: str,
        xa,
        xb,
        ya,
        yb,
        fa,
        fb,
        sa,
        sb,
        step_log,
        zeros: Sequence[Zero],
        start: QuasiState,
        homogeneous: bool = True,
    ):
        self.problem = problem
        self.lam = float(lam)
        self.direction = direction
        self._xa = np.asarray(xa, dtype=float)
        self._xb = np.asarray(xb, dtype=float)
        if len(self._xa) == 0:
            raise PreconditionError("trajectory has no steps")
        self._ya = np.asarray(ya, dtype=float)
        self._yb = np.asarray(yb, dtype=float)
        self._fa = np.asarray(fa, dtype=float)
        self._fb = np.asarray(fb, dtype=float)
        self._sa, self._sb = _fill_curvatures(
            self._xa, self._xb, self._ya, self._yb, self._fa, self._fb,
            np.asarray(sa, dtype=float), np.asarray(sb, dtype=float),
        )
        self._log = np.asarray(step_log, dtype=float)
        self.zeros = tuple(sorted(zeros, key=lambda z: z.x))
        self.start = start
        self.homogeneous = homogeneous

    # -- basic geometry --------------------------------------------------

    @property
    def x_min(self) -> float:
        return float(self._xa[0])

    @property
    def x_max(self) -> float:
        return float(self._xb[-1])

    @property
    def n_steps(self) -> int:
        return len(self._xa)

    @property
    def scale_log(self) -> float:
        """Accumulated rescaling exponent at the end of integration."""
        return float(self._log[-1] if self.direction == "forward" else self._log[0])

    def node_x(self) -> np.ndarray:
        return np.concatenate([self._xa, self._xb[-1:]])

    def zero_locations(self) -> list[float]:
        return [z.x for z in self.zeros]

    def covers(self, x: float, slack: float = 0.0) -> bool:
        return self.x_min - slack <= x <= self.x_max + slack

    # -- evaluation ------------------------------------------------------

    def _locate(self, xs: np.ndarray) -> np.ndarray:
        span = self.x_max - self.x_min
        slack = 1e-12 * max(span, abs(self.x_min), abs(self.x_max), 1.0)
        outside = (xs < self.x_min - slack) | (xs > self.x_max + slack)
        if np.any(outside):
            raise OutOfRange(
                f"x = {xs[outside][0]} outside trajectory range [{self.x_min}, {self.x_max}]"
            )
        idx = np.searchsorted(self._xa, xs, side="right") - 1
        return np.clip(idx, 0, len(self._xa) - 1)

    def _interp(self, x, kernel):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        i = self._locate(xs)
        h = self._xb[i] - self._xa[i]
        t = np.clip((xs - self._xa[i]) / h, 0.0, 1.0)
        out = [
            kernel(t, h, self._ya[k, i], self._yb[k, i], self._fa[k, i], self._fb[k, i],
                   self._sa[k, i], self._sb[k, i])
            for k in (0, 1)
        ]
        return out[0], out[1], self._log[i]

    def evaluate_scaled(self, x):
        """Return ``(u, u1, log)`` with true values ``u * exp(log)``."""
        return self._interp(x, _hermite)

    def evaluate(self, x):
        """De-scaled ``(u, u1)`` as arrays (may overflow for huge rescaling)."""
        u, v, lg = self.evaluate_scaled(x)
        if np.any(lg != 0.0):
            fac = np.exp(lg)
            u, v = u * fac, v * fac
        return u, v

    def derivative(self, x):
        """De-scaled ``(u', u1')`` of the dense-output polynomial."""
        du, dv, lg = self._interp(x, _hermite_deriv)
        fac = np.exp(lg)
        return du * fac, dv * fac

    def state(self, x: float) -> QuasiState:
        u, v = self.evaluate(x)
        return QuasiState(float(x), float(u[0]), float(v[0]))

    def u(self, x):
        return self.evaluate(x)[0]

    def u1(self, x):
        return self.evaluate(x)[1]

    def nodes(self) -> list[tuple[float, float, float, float]]:
        """``(x, u, u1, scale_log)`` at node points in integration order."""
        rows = [
            (float(self._xa[i]), float(self._ya[0, i]), float(self._ya[1, i]), float(self._log[i]))
            for i in range(len(self._xa))
        ]
        rows.append(
            (float(self._xb[-1]), float(self._yb[0, -1]), float(self._yb[1, -1]), float(self._log[-1]))
        )
        return rows if self.direction == "forward" else rows[::-1]

    def end_state(self) -> tuple[float, float, float, float]:
        """``(x, u, u1, scale_log)`` at the final point of integration."""
        return self.nodes()[-1]

    # -- transformations -------------------------------------------------

    def scaled(self, c: float) -> SolutionTrajectory:
        """``c`` times this solution (homogeneous trajectories only)."""
        if not self.homogeneous:
            raise PreconditionError("cannot scale an inhomogeneous solution")
        c = float(c)
        if c == 0.0:
            raise PreconditionError("scaling by zero gives the trivial solution")
        zeros = self.zeros if c > 0 else tuple(Zero(z.x, -z.sign) for z in self.zeros)
        return SolutionTrajectory(
            self.problem, self.lam, self.direction,
            self._xa, self._xb,
            self._ya * c, self._yb * c, self._fa * c, self._fb * c, self._sa * c, self._sb * c,
            self._log, zeros,
            QuasiState(self.start.x, self.start.u * c, self.start.u1 * c),
        )

    @classmethod
    def from_nodes(
        cls,
        problem: SLProblem,
        lam: float,
        xs: Sequence[float],
        us: Sequence[float],
        u1s: Sequence[float],
        direction: str = "forward",
    ) -> SolutionTrajectory:
        """Build a dense-output trajectory from node values of a solution.

        Slopes and curvatures come from the system itself, so ``xs`` must
        include every coefficient breakpoint inside its range.
        """
        xs = np.asarray(xs, dtype=float)
        us = np.asarray(us, dtype=float)
        vs = np.asarray(u1s, dtype=float)
        order = np.argsort(xs)
        xs, us, vs = xs[order], us[order], vs[order]
        n = len(xs) - 1
        fa, fb = np.empty((2, n)), np.empty((2, n))
        sa, sb = np.empty((2, n)), np.empty((2, n))
        for i in range(n):
            pt, qt, rt, st = problem.segment_terms(xs[i], xs[i + 1])
            for j in (0, 1):
                x, u, v = xs[i + j], us[i + j], vs[i + j]
                du = v / pt(x) - st(x) * u
                dv = st(x) * v + (qt(x) - lam * rt(x)) * u
                (fa if j == 0 else fb)[:, i] = (du, dv)
                (sa if j == 0 else sb)[:, i] = _curvature(pt, qt, rt, st, None, lam, x, u, v, du, dv)
        ya = np.vstack([us[:-1], vs[:-1]])
        yb = np.vstack([us[1:], vs[1:]])
        sa, sb = _fill_curvatures(xs[:-1], xs[1:], ya, yb, fa, fb, sa, sb)
        zeros = _scan_zeros(xs[:-1], xs[1:], ya, yb, fa, fb, sa, sb)
        k0 = 0 if direction == "forward" else n
        return cls(
            problem, lam, direction, xs[:-1], xs[1:], ya, yb, fa, fb, sa, sb, np.zeros(n), zeros,
            QuasiState(float(xs[k0]), float(us[k0]), float(vs[k0])),
        )

    # -- golden-file dump ------------------------------------------------

    def dump(self) -> str:
        return "".join(f"{x:.17g} {u:.17g} {v:.17g} {lg:.17g}\n" for x, u, v, lg in self.nodes())


def load_dump(text: str) -> list[tuple[float, float, float, float]]:
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if line:
            x, u, v, lg = (float(tok) for tok in line.split())
            rows.append((x, u, v, lg))
    return rows


def _scan_zeros(xa, xb, ya, yb, fa, fb, sa, sb) -> list[Zero]:
    out = []
    for i in range(len(xa)):
        u0, u1 = ya[0, i], yb[0, i]
        if u0 == 0.0 and i == 0:
            out.append(Zero(float(xa[i]), 1 if fa[0, i] > 0 else -1))
        if u1 == 0.0:
            out.append(Zero(float(xb[i]), 1 if fb[0, i] > 0 else -1))
        elif u0 != 0.0 and (u0 < 0) != (u1 < 0):
            h = xb[i] - xa[i]
            t = _refine_zero(h, u0, u1, fa[0, i], fb[0, i], sa[0, i], sb[0, i])
            out.append(Zero(float(xa[i] + t * h), 1 if u1 > 0 else -1))
    return out


# ---------------------------------------------------------------------------
# the integrator


def _segments(problem: SLProblem, x0: float, target: float) -> list[tuple[float, float]]:
    lo, hi = min(x0, target), max(x0, target)
    cuts = [lo] + [x for x in problem.breakpoints() if lo < x < hi] + [hi]
    segs = list(zip(cuts, cuts[1:]))
    if target < x0:
        segs = [(v, u) for u, v in reversed(segs)]
    return segs


def integrate_ivp(problem: SLProblem, spec: IVPSpec, stop_after_zeros: int | None = None) -> SolutionTrajectory:
    """Adaptive dense-output solution from ``spec.x0`` to ``spec.target``.

    Coefficient breakpoints are hard step boundaries.  With
    ``stop_after_zeros=k`` integration ends at the step containing the
    k-th zero of u (not counting a zero at ``x0``).
    """
    x0, target = float(spec.x0), float(spec.target)
    a, b = problem.a, problem.b
    for name, pt in (("x0", x0), ("target", target)):
        if not (a <= pt <= b):
            raise OutOfRange(f"{name} = {pt} outside [{a}, {b}]")
        if not math.isfinite(pt) or ((pt == a or pt == b) and not problem.evaluable_at(pt)):
            raise EndpointSingular(f"{name} = {pt} is a singular endpoint; truncate the interval")
    if x0 == target:
        raise PreconditionError("x0 and target coincide")

    lam = float(spec.lam)
    g = spec.g
    homogeneous = g is None
    rtol, atol = spec.rtol, spec.atol
    sgn = 1.0 if target > x0 else -1.0
    direction = "forward" if sgn > 0 else "backward"
    eps = np.finfo(float).eps
    breakpoints = set(problem.breakpoints())

    u, v = float(spec.u0), float(spec.u1_0)
    log_scale = 0.0
    amp = max(abs(u), abs(v))
    x = x0

    rec = {k: [] for k in ("xa", "xb", "ua", "va", "ub", "vb", "fua", "fva", "fub", "fvb",
                           "sua", "sva", "sub", "svb", "log")}
    zeros: list[Zero] = []
    n_zeros = 0
    total = abs(target - x0)
    h_abs = None
    max_step = spec.max_step
    stopped = False

    for seg_start, seg_end in _segments(problem, x0, target):
        pt, qt, rt, st = problem.segment_terms(min(seg_start, seg_end), max(seg_start, seg_end))
        gt = g.term_at(0.5 * (seg_start + seg_end)) if g is not None else None

        def rhs(xx, uu, vv):
            pv = pt(xx)
            sv = st(xx)
            du = vv / pv - sv * uu
            dv = sv * vv + (qt(xx) - lam * rt(xx)) * uu
            if gt is not None:
                dv -= rt(xx) * gt(xx)
            return du, dv

        x = seg_start
        k1u, k1v = rhs(x, u, v)
        if not (math.isfinite(k1u) and math.isfinite(k1v)):
            raise EndpointSingular(f"coefficients not finite at x = {x}")
        c1u, c1v = _curvature(pt, qt, rt, st, gt, lam, x, u, v, k1u, k1v)
        if h_abs is None:
            d0 = max(abs(u), abs(v))
            d1 = max(abs(k1u), abs(k1v))
            h_abs = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6 * max(1.0, total)
            h_abs = min(h_abs, total, max_step)

        while sgn * (seg_end - x) > 0:
            remaining = abs(seg_end - x)
            if remaining <= 4 * eps * max(abs(x), abs(seg_end), 1.0):
                break
            h_abs = min(h_abs, max_step)
            last = h_abs >= remaining
            if last:
                h_abs = remaining
            if h_abs < 16 * eps * max(abs(x), 1.0):
                raise StepSizeUnderflow(f"step size underflow at x = {x} (lam = {lam})")
            h = sgn * h_abs

            k2u, k2v = rhs(x + _C2 * h, u + h * _A21 * k1u, v + h * _A21 * k1v)
            k3u, k3v = rhs(
                x + _C3 * h,
                u + h * (_A31 * k1u + _A32 * k2u),
                v + h * (_A31 * k1v + _A32 * k2v),
            )
            k4u, k4v = rhs(
                x + _C4 * h,
                u + h * (_A41 * k1u + _A42 * k2u + _A43 * k3u),
                v + h * (_A41 * k1v + _A42 * k2v + _A43 * k3v),
            )
            k5u, k5v = rhs(
                x + _C5 * h,
                u + h * (_A51 * k1u + _A52 * k2u + _A53 * k3u + _A54 * k4u),
                v + h * (_A51 * k1v + _A52 * k2v + _A53 * k3v + _A54 * k4v),
            )
            k6u, k6v = rhs(
                x + h,
                u + h * (_A61 * k1u + _A62 * k2u + _A63 * k3u + _A64 * k4u + _A65 * k5u),
                v + h * (_A61 * k1v + _A62 * k2v + _A63 * k3v + _A64 * k4v + _A65 * k5v),
            )
            x_new = seg_end if last else x + h
            un = u + h * (_B1 * k1u + _B3 * k3u + _B4 * k4u + _B5 * k5u + _B6 * k6u)
            vn = v + h * (_B1 * k1v + _B3 * k3v + _B4 * k4v + _B5 * k5v + _B6 * k6v)
            k7u, k7v = rhs(x_new, un, vn)

            eu = h * (_E1 * k1u + _E3 * k3u + _E4 * k4u + _E5 * k5u + _E6 * k6u + _E7 * k7u)
            ev = h * (_E1 * k1v + _E3 * k3v + _E4 * k4v + _E5 * k5v + _E6 * k6v + _E7 * k7v)
            floor = atol * max(amp, 1e-300)
            err = max(
                abs(eu) / (rtol * max(abs(u), abs(un)) + floor),
                abs(ev) / (rtol * max(abs(v), abs(vn)) + floor),
            )
            if not math.isfinite(err):
                h_abs *= 0.2
                continue
            if err > 1.0:
                h_abs *= max(0.2, 0.9 * err**-0.2)
                continue

            # accepted step
            c7u, c7v = _curvature(pt, qt, rt, st, gt, lam, x_new, un, vn, k7u, k7v)
            if x == x0 and u == 0.0 and homogeneous:
                zeros.append(Zero(x, 1 if k1u > 0 else -1))
            for key, val in (("xa", x), ("xb", x_new), ("ua", u), ("va", v), ("ub", un), ("vb", vn),
                             ("fua", k1u), ("fva", k1v), ("fub", k7u), ("fvb", k7v),
                             ("sua", c1u), ("sva", c1v), ("sub", c7u), ("svb", c7v),
                             ("log", log_scale)):
                rec[key].append(val)

            if un == 0.0:
                zeros.append(Zero(x_new, 1 if k7u > 0 else -1))
                n_zeros += 1
            elif u != 0.0 and (u < 0) != (un < 0):
                t = _refine_zero(h, u, un, k1u, k7u, c1u, c7u)
                xz = x + t * h
                for edge in (x, x_new):
                    if edge in breakpoints and abs(xz - edge) <= 1e-12 * max(1.0, abs(edge)):
                        xz = edge
                zeros.append(Zero(xz, 1 if (un - u) * sgn > 0 else -1))
                n_zeros += 1

            norm_prev = max(abs(u), abs(v))
            norm_new = max(abs(un), abs(vn))
            if norm_new == 0.0 or (homogeneous and norm_new < 1e-14 * norm_prev and norm_new < 1e-14 * amp):
                raise InternalConsistencyError(
                    f"u and u^[1] vanish simultaneously near x = {x_new} (lam = {lam})"
                )
            x, u, v = x_new, un, vn
            k1u, k1v, c1u, c1v = k7u, k7v, c7u, c7v
            amp = max(amp, norm_new)
            if homogeneous and (norm_new > RESCALE_ABOVE or norm_new < RESCALE_BELOW):
                u, v = u / norm_new, v / norm_new
                k1u, k1v, c1u, c1v = k1u / norm_new, k1v / norm_new, c1u / norm_new, c1v / norm_new
                log_scale += math.log(norm_new)
                amp = 1.0

            fac = 0.9 * err**-0.2 if err > 0 else 5.0
            h_abs *= min(5.0, max(0.2, fac))
            if stop_after_zeros is not None and n_zeros >= stop_after_zeros:
                stopped = True
                break
        if stopped:
            break

    arr = {k: np.array(val, dtype=float) for k, val in rec.items()}
    ya = np.vstack([arr["ua"], arr["va"]])
    yb = np.vstack([arr["ub"], arr["vb"]])
    fa = np.vstack([arr["fua"], arr["fva"]])
    fb = np.vstack([arr["fub"], arr["fvb"]])
    sa = np.vstack([arr["sua"], arr["sva"]])
    sb = np.vstack([arr["sub"], arr["svb"]])
    start = QuasiState(x0, float(spec.u0), float(spec.u1_0))
    if sgn > 0:
        return SolutionTrajectory(problem, lam, direction, arr["xa"], arr["xb"], ya, yb, fa, fb, sa, sb,
                                  arr["log"], zeros, start, homogeneous)
    # backward: swap ends so every stored step runs left to right
    rev = slice(None, None, -1)
    return SolutionTrajectory(
        problem, lam, direction,
        arr["xb"][rev], arr["xa"][rev],
        yb[:, rev], ya[:, rev], fb[:, rev], fa[:, rev], sb[:, rev], sa[:, rev],
        arr["log"][rev], zeros, start, homogeneous,
    )


def solve(problem: SLProblem, lam: float, x0: float, u0: float, u1_0: float, target: float, **kw) -> SolutionTrajectory:
    """Shorthand for :func:`integrate_ivp`."""
    stop = kw.pop("stop_after_zeros", None)
    return integrate_ivp(problem, IVPSpec(x0=x0, u0=u0, u1_0=u1_0, lam=lam, target=target, **kw), stop)


# ---------------------------------------------------------------------------
# derived quantities


def wronskian(t1: SolutionTrajectory, t2: SolutionTrajectory, x):
    """W(t1, t2) = u1 v2 - v1 u2 (v the quasi-derivative), de-scaled.

    Constant in x when both trajectories solve the same equation at the
    same lambda.  Returns a float for scalar ``x``.
    """
    u1, v1, l1 = t1.evaluate_scaled(x)
    u2, v2, l2 = t2.evaluate_scaled(x)
    w = (u1 * v2 - v1 * u2) * np.exp(l1 + l2)
    return float(w[0]) if np.ndim(x) == 0 else w


_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def gauss_cells(lo, hi):
    """8-point Gauss-Legendre nodes/weights on each cell [lo[i], hi[i]]."""
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return mid[:, None] + half[:, None] * _GL_X[None, :], half[:, None] * _GL_W[None, :]


def cell_grid(traj: SolutionTrajectory, c: float, d: float, extra: Iterable[float] = ()) -> np.ndarray:
    """Sorted trajectory nodes and coefficient breakpoints within [c, d]."""
    pts = [c, d, *extra]
    pts += [x for x in traj.node_x() if c < x < d]
    pts += [x for x in traj.problem.breakpoints() if c < x < d]
    return np.unique(np.array(pts, dtype=float))


def reciprocal_integrals(traj: SolutionTrajectory, grid: np.ndarray) -> np.ndarray:
    """Integrals of 1/(p u^2) over consecutive cells of ``grid`` (de-scaled u)."""
    pts, wts = gauss_cells(grid[:-1], grid[1:])
    flat = pts.ravel()
    u, _, lg = traj.evaluate_scaled(flat)
    p = traj.problem.p.values(flat)
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        vals = np.exp(-2.0 * lg) / (p * u * u)
    return np.sum(vals.reshape(pts.shape) * wts, axis=1)


def second_solution(
    problem: SLProblem, base: SolutionTrajectory, x0: float, rng: tuple[float, float]
) -> SolutionTrajectory:
    """Reduction of order: u2(x) = u(x) * integral_{x0}^x dt / (p u^2).

    Requires ``base`` nonvanishing on the open range.  The result has
    u2^[1] = u^[1] J + 1/u, so W(base, u2) = 1 at every node.
    """
    c, d = map(float, rng)
    if not (c < x0 < d):
        raise PreconditionError(f"x0 = {x0} must lie inside ({c}, {d})")
    if not (base.covers(c) and base.covers(d)):
        raise OutOfRange(f"base trajectory does not cover [{c}, {d}]")
    if any(c < z < d for z in base.zero_locations()):
        raise VanishingBase(f"base solution vanishes inside ({c}, {d})")
    grid = cell_grid(base, c, d, extra=[x0])
    cells = reciprocal_integrals(base, grid)
    cum = np.concatenate([[0.0], np.cumsum(cells)])
    J = cum - cum[int(np.searchsorted(grid, x0))]
    u, v = base.evaluate(grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        u2 = u * J
        v2 = v * J + 1.0 / u
    if not (np.all(np.isfinite(u2)) and np.all(np.isfinite(v2))):
        raise VanishingBase("base solution vanishes at a range endpoint")
    return SolutionTrajectory.from_nodes(problem, base.lam, grid, u2, v2)


def count_zeros(
    traj: SolutionTrajectory,
    subinterval: tuple[float, float],
    open: bool = True,
    ztol: float | None = None,
) -> int:
    """Zeros of u in (c, d) (``open=True``) or in [c, d].

    A zero within ``ztol`` (default ``1e-9 * (d - c)``) of an end counts as
    sitting on that end: excluded in open mode, included in closed mode.
    In closed mode an end also counts when the linearized distance
    |u / u'| to a zero is below ``ztol``.
    """
    c, d = map(float, subinterval)
    if not (traj.covers(c, 1e-12 * max(1.0, abs(c))) and traj.covers(d, 1e-12 * max(1.0, abs(d)))):
        raise OutOfRange(f"trajectory does not cover [{c}, {d}]")
    if ztol is None:
        ztol = 1e-9 * (d - c)
    zs = traj.zero_locations()
    if open:
        return sum(1 for z in zs if c + ztol < z < d - ztol)
    count = sum(1 for z in zs if c - ztol <= z <= d + ztol)
    for end in (c, d):
        if any(abs(z - end) <= ztol for z in zs):
            continue
        u, _ = traj.evaluate(end)
        du, _ = traj.derivative(end)
        if u[0] == 0.0 or (du[0] != 0.0 and abs(u[0] / du[0]) <= ztol):
            count += 1
    return count
