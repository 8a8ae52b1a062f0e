"""Population bounds on agreement between MOS and any objective estimator.

The best conceivable estimator outputs the true quality itself, so its
expected MSE against MOS is a lower bound and its PCC an upper bound. Both
depend only on the expected vote variance ``E[v_r(Y)]``, the votes per file
``n_v`` and the spread of either the MOS or the true quality.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable

from .errors import (
    DegenerateError,
    InvalidVotesError,
    MosBoundsError,
    NoiseExceedsSignalError,
)
from .model import BinoVotes
from .quality import QualityDistribution, check_feasible
from .scale import RatingScale

DATA_DRIVEN = "data-driven"
GLOBAL_AVERAGE = "global-average"
BINOVOTES = "binovotes-model"
VARIANCE_SOURCES = (DATA_DRIVEN, GLOBAL_AVERAGE, BINOVOTES)


@dataclass(frozen=True)
class BoundInputs:
    n_v: float
    expected_vote_variance: float
    var_Y: float | None = None
    var_X: float | None = None

    def __post_init__(self):
        if not self.n_v > 0:
            raise InvalidVotesError(f"n_v={self.n_v} must be positive")
        if self.expected_vote_variance < 0:
            raise MosBoundsError("expected vote variance must be non-negative")
        if self.var_X is not None and self.var_Y is not None:
            implied = self.var_Y + self.expected_vote_variance / self.n_v
            if abs(implied - self.var_X) > 1e-9:
                raise MosBoundsError(
                    f"var_X={self.var_X} inconsistent with var_Y + E[v_r]/n_v = {implied}"
                )


@dataclass(frozen=True)
class BoundReport:
    mse_bound: float
    pcc_bound: float
    variance_source: str
    inputs: BoundInputs

    @property
    def rmse_bound(self) -> float:
        return math.sqrt(self.mse_bound)

    def as_dict(self) -> dict:
        out = {
            "variance_source": self.variance_source,
            "mse_bound": self.mse_bound,
            "rmse_bound": self.rmse_bound,
            "pcc_bound": self.pcc_bound,
        }
        out.update(asdict(self.inputs))
        return out


def mse_lower_bound(expected_vote_variance: float, n_v: float) -> float:
    """Expected MSE between MOS and true quality, ``E[v_r(Y)] / n_v``."""
    if not n_v > 0:
        raise InvalidVotesError(f"n_v={n_v} must be positive")
    if expected_vote_variance < 0:
        raise MosBoundsError("expected vote variance must be non-negative")
    return expected_vote_variance / n_v


def pcc_upper_bound_from_mosvar(var_X: float, expected_vote_variance: float, n_v: float) -> float:
    """PCC bound when the MOS variance is known (the form used on test data)."""
    if not var_X > 0:
        raise DegenerateError(f"MOS variance {var_X} must be positive")
    mse = mse_lower_bound(expected_vote_variance, n_v)
    if mse >= var_X:
        ratio = mse / var_X
        raise NoiseExceedsSignalError(
            f"vote noise per file ({mse:.4g}) is not below the MOS variance ({var_X:.4g}); "
            f"ratio {ratio:.4g}",
            ratio,
        )
    return math.sqrt((var_X - mse) / var_X)


def pcc_upper_bound_from_qualityvar(var_Y: float, expected_vote_variance: float, n_v: float) -> float:
    """PCC bound when the true-quality variance is known."""
    if not var_Y > 0:
        raise DegenerateError(f"quality variance {var_Y} must be positive")
    mse = mse_lower_bound(expected_vote_variance, n_v)
    return math.sqrt(var_Y / (var_Y + mse))


def binovotes_bounds(scale: RatingScale, mu: float, var: float, n_v: float,
                     moments: str = "quality") -> BoundReport:
    """Both bounds when votes follow BinoVotes.

    With ``moments="quality"`` the pair ``(mu, var)`` describes the true
    quality law. With ``moments="mos"`` it is a MOS mean/variance, and the
    quality variance is backed out first by removing the vote noise.
    ``n_v`` may be a dataset average and need not be integral.
    """
    if not n_v > 0:
        raise InvalidVotesError(f"n_v={n_v} must be positive")
    n_m = n_v * (scale.n_s - 1)
    if moments == "mos":
        from .estimate import SampleStats, binovotes_vote_variance

        vote_var = binovotes_vote_variance(SampleStats(mu, var, 2, n_v), scale)
        var_Y = var - vote_var / n_v
        var_X = var
    elif moments == "quality":
        check_feasible(mu, var, scale.s_L, scale.s_H)
        var_Y = var
        vote_var = BinoVotes(scale).expected_vote_variance(mu, var)
        var_X = var_Y + vote_var / n_v
    else:
        raise ValueError(f"moments must be 'quality' or 'mos', not {moments!r}")
    if not var_Y > 0:
        raise DegenerateError("zero quality variance: the PCC bound is undefined")
    mse = (scale.parabola(mu) - var_Y) / n_m
    pcc = math.sqrt(n_m * var_Y / ((n_m - 1) * var_Y + scale.parabola(mu)))
    return BoundReport(
        mse_bound=float(mse),
        pcc_bound=float(pcc),
        variance_source=BINOVOTES,
        inputs=BoundInputs(n_v, float(vote_var), float(var_Y), float(var_X)),
    )


def bound_curves(scale: RatingScale, dist: QualityDistribution,
                 n_v_range: Iterable[int]) -> list[tuple[int, float, float]]:
    """``(n_v, rmse_bound, pcc_bound)`` rows for a sweep over votes per file."""
    mu, var = dist.mean(), dist.variance()
    rows = []
    for n_v in n_v_range:
        rep = binovotes_bounds(scale, mu, var, n_v)
        rows.append((int(n_v), rep.rmse_bound, rep.pcc_bound))
    return rows
