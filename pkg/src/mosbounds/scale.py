"""Discrete rating scales and the MOS lattices they induce.

A rating scale has ``n_s`` equally spaced levels from ``s_L`` to ``s_H``.
Averaging ``n_v`` votes on that scale can only produce the
``n_v * (n_s - 1) + 1`` points of the MOS lattice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidScaleError, InvalidVotesError, OutOfRangeError

# relative tolerance for lattice membership / range checks
LATTICE_RTOL = 1e-12


@dataclass(frozen=True)
class RatingScale:
    """Uniform rating scale ``{s_L + k (s_H - s_L)/(n_s - 1)}``."""

    s_L: float
    s_H: float
    n_s: int

    def __post_init__(self):
        if not (np.isfinite(self.s_L) and np.isfinite(self.s_H)):
            raise InvalidScaleError("scale bounds must be finite")
        if self.s_L >= self.s_H:
            raise InvalidScaleError(f"s_L={self.s_L} must be below s_H={self.s_H}")
        if int(self.n_s) != self.n_s or self.n_s < 2:
            raise InvalidScaleError(f"n_s={self.n_s} must be an integer >= 2")
        object.__setattr__(self, "n_s", int(self.n_s))

    @property
    def width(self) -> float:
        return self.s_H - self.s_L

    @property
    def step(self) -> float:
        return self.width / (self.n_s - 1)

    def level(self, k: int) -> float:
        if not 0 <= k < self.n_s:
            raise IndexError(k)
        if k == self.n_s - 1:
            return float(self.s_H)
        return self.s_L + k * self.step

    @property
    def levels(self) -> np.ndarray:
        out = self.s_L + np.arange(self.n_s) * self.step
        out[-1] = self.s_H
        return out

    def contains(self, y: float) -> bool:
        tol = LATTICE_RTOL * self.width
        return self.s_L - tol <= y <= self.s_H + tol

    def check(self, y: float) -> float:
        """Return ``y`` clipped onto the support, raising if it is clearly outside."""
        if not self.contains(y):
            raise OutOfRangeError(f"{y} outside [{self.s_L}, {self.s_H}]")
        return min(max(float(y), self.s_L), self.s_H)

    def to_unit(self, y):
        """Map quality onto ``[0, 1]`` (the binomial success parameter)."""
        return (np.asarray(y, dtype=float) - self.s_L) / self.width

    def parabola(self, y):
        """``(y - s_L)(s_H - y)``, the un-normalised vote variance shape."""
        y = np.asarray(y, dtype=float)
        return (y - self.s_L) * (self.s_H - y)

    def level_index(self, vote: float, tol: float = 1e-9) -> int:
        """Index of the level equal to ``vote``; raises if the vote is off-scale."""
        k = round((vote - self.s_L) / self.step)
        if 0 <= k < self.n_s and abs(self.level(k) - vote) <= tol * max(1.0, self.width):
            return int(k)
        raise OutOfRangeError(f"vote {vote} is not a level of {self}")


def make_scale(s_L: float, s_H: float, n_s: int) -> RatingScale:
    return RatingScale(float(s_L), float(s_H), n_s)


#: the common five-point scale
MOS_SCALE = RatingScale(1.0, 5.0, 5)


@dataclass(frozen=True)
class MosLattice:
    """Points a MOS over ``n_v`` votes on ``scale`` can take."""

    scale: RatingScale
    n_v: int

    def __post_init__(self):
        if int(self.n_v) != self.n_v or self.n_v < 1:
            raise InvalidVotesError(f"n_v={self.n_v} must be an integer >= 1")
        object.__setattr__(self, "n_v", int(self.n_v))

    @property
    def n_m(self) -> int:
        return self.n_v * (self.scale.n_s - 1)

    @property
    def step(self) -> float:
        return self.scale.width / self.n_m

    def __len__(self) -> int:
        return self.n_m + 1

    def point(self, k: int) -> float:
        if not 0 <= k <= self.n_m:
            raise IndexError(k)
        if k == self.n_m:
            return float(self.scale.s_H)
        return self.scale.s_L + k * self.step

    @property
    def points(self) -> np.ndarray:
        out = self.scale.s_L + np.arange(self.n_m + 1) * self.step
        out[-1] = self.scale.s_H
        return out

    def nearest_index(self, x: float) -> int:
        k = int(np.rint((x - self.scale.s_L) / self.step))
        return min(max(k, 0), self.n_m)

    def contains(self, x: float) -> bool:
        k = self.nearest_index(x)
        return abs(self.point(k) - x) <= LATTICE_RTOL * self.scale.width


def mos_lattice(scale: RatingScale, n_v: int) -> MosLattice:
    return MosLattice(scale, n_v)


def nearest_lattice_error(lattice: MosLattice, y: float) -> float:
    """Smallest ``|x - y|`` over lattice points ``x``.

    This is the error floor imposed by MOS discreteness alone: with one vote
    on the 1-5 scale a file of quality 3.30 cannot get closer than 0.30.
    """
    y = lattice.scale.check(y)
    pos = (y - lattice.scale.s_L) / lattice.step
    lo = min(int(np.floor(pos)), lattice.n_m)
    candidates = [lattice.point(k) for k in (lo, lo + 1) if 0 <= k <= lattice.n_m]
    return min(abs(p - y) for p in candidates)
