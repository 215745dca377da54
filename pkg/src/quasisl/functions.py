"""Test functions for Rayleigh quotients and form identities.

Each function provides ``values``, ``slopes`` and ``second`` (vectorized),
a ``support`` interval outside which it vanishes, and ``knots``: points
where it is only piecewise smooth, used as quadrature panel boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError


class TestFunction:
    support: tuple[float, float]

    __test__ = False  # not a pytest class

    def values(self, xs) -> np.ndarray:
        raise NotImplementedError

    def slopes(self, xs) -> np.ndarray:
        raise NotImplementedError

    def second(self, xs) -> np.ndarray:
        raise NotImplementedError

    @property
    def knots(self) -> tuple[float, ...]:
        return tuple(self.support)

    def scaled(self, c: float) -> Scaled:
        return Scaled(self, float(c))


@dataclass(frozen=True)
class Scaled(TestFunction):
    base: TestFunction
    factor: float

    @property
    def support(self):
        return self.base.support

    @property
    def knots(self):
        return self.base.knots

    def values(self, xs):
        return self.factor * self.base.values(xs)

    def slopes(self, xs):
        return self.factor * self.base.slopes(xs)

    def second(self, xs):
        return self.factor * self.base.second(xs)


@dataclass(frozen=True)
class GridFunction(TestFunction):
    """Piecewise-linear interpolant of ``(xs, fs)``; zero outside [xs[0], xs[-1]]."""

    xs: tuple[float, ...]
    fs: tuple[float, ...]

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        if len(xs) != len(self.fs) or len(xs) < 2:
            raise PreconditionError("grid function needs matching xs and fs of length >= 2")
        if not np.all(np.diff(xs) > 0):
            raise PreconditionError("grid nodes must strictly increase")
        object.__setattr__(self, "xs", tuple(map(float, self.xs)))
        object.__setattr__(self, "fs", tuple(map(float, self.fs)))

    @property
    def support(self):
        return (self.xs[0], self.xs[-1])

    @property
    def knots(self):
        return self.xs

    def values(self, xs):
        xs = np.asarray(xs, dtype=float)
        return np.interp(xs, self.xs, self.fs, left=0.0, right=0.0)

    def slopes(self, xs):
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        nodes = np.asarray(self.xs)
        vals = np.asarray(self.fs)
        k = np.clip(np.searchsorted(nodes, xs, side="right") - 1, 0, len(nodes) - 2)
        out = (vals[k + 1] - vals[k]) / (nodes[k + 1] - nodes[k])
        return np.where((xs < nodes[0]) | (xs > nodes[-1]), 0.0, out)

    def second(self, xs):
        return np.zeros_like(np.asarray(xs, dtype=float))


def hat(a: float, b: float, peak: float | None = None, height: float = 1.0) -> GridFunction:
    peak = 0.5 * (a + b) if peak is None else peak
    return GridFunction((a, peak, b), (0.0, height, 0.0))


@dataclass(frozen=True)
class Bump(TestFunction):
    """A * (1 - cos(2 pi (x - lo) / (hi - lo))) on [lo, hi]; C^1, zero outside."""

    lo: float
    hi: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise PreconditionError(f"empty bump support ({self.lo}, {self.hi})")

    @property
    def support(self):
        return (self.lo, self.hi)

    def _phase(self, xs):
        xs = np.asarray(xs, dtype=float)
        w = 2 * math.pi / (self.hi - self.lo)
        inside = (xs >= self.lo) & (xs <= self.hi)
        return xs, w, inside

    def values(self, xs):
        xs, w, inside = self._phase(xs)
        return np.where(inside, self.amplitude * (1 - np.cos(w * (xs - self.lo))), 0.0)

    def slopes(self, xs):
        xs, w, inside = self._phase(xs)
        return np.where(inside, self.amplitude * w * np.sin(w * (xs - self.lo)), 0.0)

    def second(self, xs):
        xs, w, inside = self._phase(xs)
        return np.where(inside, self.amplitude * w * w * np.cos(w * (xs - self.lo)), 0.0)


@dataclass(frozen=True)
class SineArch(TestFunction):
    """sin(k pi (x - lo) / (hi - lo)) on [lo, hi], zero outside.

    With k = 1 on the whole interval this is the first Dirichlet
    eigenfunction of -u'' and serves as the near-eigenfunction sample.
    """

    lo: float
    hi: float
    k: int = 1

    @property
    def support(self):
        return (self.lo, self.hi)

    def _arg(self, xs):
        xs = np.asarray(xs, dtype=float)
        w = self.k * math.pi / (self.hi - self.lo)
        return xs, w, (xs >= self.lo) & (xs <= self.hi)

    def values(self, xs):
        xs, w, inside = self._arg(xs)
        return np.where(inside, np.sin(w * (xs - self.lo)), 0.0)

    def slopes(self, xs):
        xs, w, inside = self._arg(xs)
        return np.where(inside, w * np.cos(w * (xs - self.lo)), 0.0)

    def second(self, xs):
        xs, w, inside = self._arg(xs)
        return np.where(inside, -w * w * np.sin(w * (xs - self.lo)), 0.0)


@dataclass(frozen=True)
class Smooth(TestFunction):
    """Any function with explicit first and second derivatives on [lo, hi]."""

    f: object
    df: object
    ddf: object
    lo: float
    hi: float
    label: str = field(default="smooth", compare=False)

    @property
    def support(self):
        return (self.lo, self.hi)

    def values(self, xs):
        return np.asarray(self.f(np.asarray(xs, dtype=float)), dtype=float)

    def slopes(self, xs):
        return np.asarray(self.df(np.asarray(xs, dtype=float)), dtype=float)

    def second(self, xs):
        return np.asarray(self.ddf(np.asarray(xs, dtype=float)), dtype=float)


def random_bumps(a: float, b: float, n: int, seed: int = 0, margin: float = 0.0) -> list[TestFunction]:
    """Deterministic sample: the sine arch on (a, b) plus ``n - 1`` random bumps.

    Bump supports are uniform random subintervals of (a + margin, b - margin)
    at least a tenth of its length long.
    """
    if n < 1:
        raise PreconditionError("sample size must be positive")
    rng = np.random.default_rng(seed)
    lo, hi = a + margin, b - margin
    out: list[TestFunction] = [SineArch(a, b)]
    min_len = 0.1 * (hi - lo)
    while len(out) < n:
        c, d = sorted(rng.uniform(lo, hi, size=2))
        if d - c >= min_len:
            out.append(Bump(float(c), float(d), float(rng.uniform(0.5, 2.0))))
    return out
