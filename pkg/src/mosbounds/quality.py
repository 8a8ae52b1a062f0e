"""True-quality distributions on a bounded support.

These are the laws ``f_Y`` the hidden file qualities are drawn from. The
bound formulas only need the first two moments, so :class:`EmpiricalMoments`
exists for moment-only work; it refuses density and sampling requests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import (
    InfeasibleMomentsError,
    InvalidScaleError,
    OutOfRangeError,
    UnsupportedDistributionError,
)
from .scale import RatingScale


def _check_support(lo: float, hi: float) -> None:
    if not lo < hi:
        raise InvalidScaleError(f"support [{lo}, {hi}] is empty")


class QualityDistribution:
    """Common interface. Subclasses are frozen dataclasses with ``lo``/``hi``."""

    lo: float
    hi: float
    has_density = True
    sampleable = True

    def mean(self) -> float:
        raise NotImplementedError

    def variance(self) -> float:
        raise NotImplementedError

    def _pdf(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def pdf(self, y):
        """Density at ``y``; zero outside the support."""
        if not self.has_density:
            raise UnsupportedDistributionError(f"{self.name} has no density")
        y = np.asarray(y, dtype=float)
        inside = (y >= self.lo) & (y <= self.hi)
        out = np.zeros_like(y)
        if np.any(inside):
            out[inside] = self._pdf(y[inside])
        return out if out.ndim else float(out)

    def _sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if not self.sampleable:
            raise UnsupportedDistributionError(f"{self.name} cannot be sampled")
        if n < 0:
            raise ValueError("sample size must be non-negative")
        return np.clip(self._sample(rng, int(n)), self.lo, self.hi)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Interior points where the density is not smooth (for quadrature)."""
        return ()

    @property
    def name(self) -> str:
        return type(self).__name__


@dataclass(frozen=True)
class Uniform(QualityDistribution):
    lo: float = 1.0
    hi: float = 5.0

    def __post_init__(self):
        _check_support(self.lo, self.hi)

    def mean(self):
        return (self.lo + self.hi) / 2

    def variance(self):
        return (self.hi - self.lo) ** 2 / 12

    def _pdf(self, y):
        return np.full_like(y, 1.0 / (self.hi - self.lo))

    def _sample(self, rng, n):
        return rng.uniform(self.lo, self.hi, size=n)

    @property
    def name(self):
        return "uniform"


@dataclass(frozen=True)
class ScaledBeta(QualityDistribution):
    """Beta(alpha, beta) stretched from ``[0, 1]`` onto ``[lo, hi]``."""

    alpha: float
    beta: float
    lo: float = 1.0
    hi: float = 5.0

    def __post_init__(self):
        _check_support(self.lo, self.hi)
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("beta shape parameters must be positive")

    def mean(self):
        return self.lo + (self.hi - self.lo) * self.alpha / (self.alpha + self.beta)

    def variance(self):
        a, b = self.alpha, self.beta
        return (self.hi - self.lo) ** 2 * a * b / ((a + b) ** 2 * (a + b + 1))

    def _pdf(self, y):
        w = self.hi - self.lo
        return stats.beta.pdf((y - self.lo) / w, self.alpha, self.beta) / w

    def _sample(self, rng, n):
        # two-gamma construction
        g1 = rng.gamma(self.alpha, size=n)
        g2 = rng.gamma(self.beta, size=n)
        return self.lo + (self.hi - self.lo) * g1 / (g1 + g2)

    @property
    def name(self):
        return f"beta:{self.alpha:g}:{self.beta:g}"


@dataclass(frozen=True)
class Triangular(QualityDistribution):
    mode: float
    lo: float = 1.0
    hi: float = 5.0

    def __post_init__(self):
        _check_support(self.lo, self.hi)
        if not self.lo <= self.mode <= self.hi:
            raise OutOfRangeError(f"mode {self.mode} outside [{self.lo}, {self.hi}]")

    def mean(self):
        return (self.lo + self.hi + self.mode) / 3

    def variance(self):
        a, b, c = self.lo, self.hi, self.mode
        return (a * a + b * b + c * c - a * b - a * c - b * c) / 18

    def _pdf(self, y):
        a, b, c = self.lo, self.hi, self.mode
        peak = 2.0 / (b - a)
        up = peak * (y - a) / (c - a) if c > a else np.full_like(y, peak)
        down = peak * (b - y) / (b - c) if b > c else np.full_like(y, peak)
        return np.where(y < c, up, down)

    def _sample(self, rng, n):
        a, b, c = self.lo, self.hi, self.mode
        u = rng.random(n)
        split = (c - a) / (b - a)
        left = a + np.sqrt(u * (b - a) * (c - a))
        right = b - np.sqrt((1 - u) * (b - a) * (b - c))
        return np.where(u < split, left, right)

    @property
    def breakpoints(self):
        return (self.mode,) if self.lo < self.mode < self.hi else ()

    @property
    def name(self):
        return f"tri:{self.mode:g}"


@dataclass(frozen=True)
class PointMass(QualityDistribution):
    y0: float
    lo: float = 1.0
    hi: float = 5.0
    has_density = False

    def __post_init__(self):
        _check_support(self.lo, self.hi)
        if not self.lo <= self.y0 <= self.hi:
            raise OutOfRangeError(f"{self.y0} outside [{self.lo}, {self.hi}]")

    def mean(self):
        return float(self.y0)

    def variance(self):
        return 0.0

    def _sample(self, rng, n):
        return np.full(n, float(self.y0))

    @property
    def name(self):
        return f"point:{self.y0:g}"


@dataclass(frozen=True)
class EmpiricalMoments(QualityDistribution):
    """Only a mean and variance; enough for the closed-form bounds."""

    mu: float
    var: float
    lo: float = 1.0
    hi: float = 5.0
    has_density = False
    sampleable = False

    def __post_init__(self):
        _check_support(self.lo, self.hi)
        check_feasible(self.mu, self.var, self.lo, self.hi)

    def mean(self):
        return float(self.mu)

    def variance(self):
        return float(self.var)

    @property
    def name(self):
        return f"moments:{self.mu:g}:{self.var:g}"


def check_feasible(mu: float, var: float, lo: float, hi: float, tol: float = 1e-12) -> None:
    """Raise unless some law on ``[lo, hi]`` has mean ``mu`` and variance ``var``."""
    if not lo <= mu <= hi:
        raise InfeasibleMomentsError(f"mean {mu} outside [{lo}, {hi}]")
    limit = (mu - lo) * (hi - mu)
    if var < -tol or var > limit + tol * (hi - lo) ** 2:
        raise InfeasibleMomentsError(
            f"variance {var} outside the feasible range [0, {limit:.6g}] for mean {mu}"
        )


def parse_distribution(text: str, scale: RatingScale) -> QualityDistribution:
    """Build a distribution from ``uniform``, ``beta:A:B``, ``tri:MODE``,
    ``point:Y`` or ``moments:MU:VAR`` on the scale's support."""
    parts = text.strip().lower().split(":")
    kind, args = parts[0], parts[1:]
    lo, hi = scale.s_L, scale.s_H
    try:
        nums = [float(a) for a in args]
    except ValueError:
        raise ValueError(f"bad distribution spec {text!r}") from None
    if any(not math.isfinite(v) for v in nums):
        raise ValueError(f"bad distribution spec {text!r}")
    expected = {"uniform": 0, "beta": 2, "tri": 1, "point": 1, "moments": 2}
    if kind not in expected or len(nums) != expected[kind]:
        raise ValueError(
            f"bad distribution spec {text!r}; use uniform, beta:A:B, tri:MODE, point:Y or moments:MU:VAR"
        )
    if kind == "uniform":
        return Uniform(lo, hi)
    if kind == "beta":
        return ScaledBeta(nums[0], nums[1], lo, hi)
    if kind == "tri":
        return Triangular(nums[0], lo, hi)
    if kind == "point":
        return PointMass(nums[0], lo, hi)
    return EmpiricalMoments(nums[0], nums[1], lo, hi)
