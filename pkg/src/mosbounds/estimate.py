"""Bound estimates from real subjective-test results.

A test gives a sample of MOS values and, sometimes, per-file vote variances.
From these we estimate the MOS mean/variance and the expected vote variance,
which can come from three places:

* ``data``: the average observed per-file vote variance,
* ``global``: a fixed value averaged over other tests on the same scale,
* ``binovotes``: the value the BinoVotes model implies for the MOS sample.
"""

from __future__ import annotations

import math
import statistics
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bounds import (
    BINOVOTES,
    DATA_DRIVEN,
    GLOBAL_AVERAGE,
    BoundInputs,
    BoundReport,
    mse_lower_bound,
    pcc_upper_bound_from_mosvar,
)
from .errors import (
    DegenerateError,
    InfeasibleMomentsError,
    MixedScalesError,
    MosBoundsError,
    NoVarianceInfoError,
    OutOfRangeError,
    TooFewFilesError,
)
from .scale import MOS_SCALE, MosLattice, RatingScale

#: global average observed vote variance over the 18 reference tests (1-5 scale)
GLOBAL_VOTE_VARIANCE = 0.64

OFF_LATTICE_TOL = 1e-6

_MODE_ALIASES = {
    "data": DATA_DRIVEN,
    DATA_DRIVEN: DATA_DRIVEN,
    "global": GLOBAL_AVERAGE,
    GLOBAL_AVERAGE: GLOBAL_AVERAGE,
    "binovotes": BINOVOTES,
    BINOVOTES: BINOVOTES,
}


class OffLatticeWarning(UserWarning):
    pass


class ExcludedFilesWarning(UserWarning):
    pass


def vote_variance(votes: Sequence[float], convention: str = "unbiased") -> float:
    """Sample variance of one file's votes (``n - 1`` denominator by default)."""
    if convention not in ("unbiased", "population"):
        raise ValueError(f"unknown variance convention {convention!r}")
    ddof = 1 if convention == "unbiased" else 0
    if len(votes) - ddof < 1:
        raise DegenerateError("not enough votes for a variance")
    return float(np.var(np.asarray(votes, dtype=float), ddof=ddof))


@dataclass(frozen=True)
class FileRecord:
    file_id: str
    mos: float
    n_votes: int
    vote_variance: float | None = None
    raw_votes: tuple[float, ...] | None = None

    def __post_init__(self):
        if int(self.n_votes) != self.n_votes or self.n_votes < 1:
            raise MosBoundsError(f"{self.file_id}: n_votes must be a positive integer")
        if self.vote_variance is not None and self.vote_variance < 0:
            raise MosBoundsError(f"{self.file_id}: negative vote variance")
        if self.n_votes == 1 and self.vote_variance is not None:
            raise MosBoundsError(f"{self.file_id}: a single vote has no variance")
        if self.raw_votes is not None:
            votes = self.raw_votes
            if len(votes) != self.n_votes:
                raise MosBoundsError(f"{self.file_id}: n_votes disagrees with raw votes")
            if abs(float(np.mean(votes)) - self.mos) > 1e-9:
                raise MosBoundsError(f"{self.file_id}: MOS disagrees with raw votes")

    @classmethod
    def from_votes(cls, file_id: str, votes: Sequence[float],
                   convention: str = "unbiased") -> "FileRecord":
        votes = tuple(float(v) for v in votes)
        if not votes:
            raise MosBoundsError(f"{file_id}: no votes")
        var = vote_variance(votes, convention) if len(votes) > 1 else None
        return cls(file_id, float(np.mean(votes)), len(votes), var, votes)


@dataclass(frozen=True)
class MosDataset:
    scale: RatingScale
    files: tuple[FileRecord, ...]
    name: str = "dataset"

    def __post_init__(self):
        object.__setattr__(self, "files", tuple(self.files))
        off = 0
        for rec in self.files:
            if not self.scale.contains(rec.mos):
                raise OutOfRangeError(f"{rec.file_id}: MOS {rec.mos} outside the scale")
            lattice = MosLattice(self.scale, rec.n_votes)
            if abs(lattice.point(lattice.nearest_index(rec.mos)) - rec.mos) > OFF_LATTICE_TOL:
                off += 1
        if off:
            warnings.warn(
                f"{self.name}: {off} MOS value(s) are not averages of their declared vote counts",
                OffLatticeWarning,
                stacklevel=3,
            )

    def __len__(self):
        return len(self.files)

    @property
    def mos(self) -> np.ndarray:
        return np.array([r.mos for r in self.files])

    @property
    def n_votes(self) -> np.ndarray:
        return np.array([r.n_votes for r in self.files])

    def has_variance_info(self) -> bool:
        return any(r.vote_variance is not None or (r.raw_votes and r.n_votes > 1)
                   for r in self.files)


@dataclass(frozen=True)
class SampleStats:
    mu_hat: float
    var_hat: float
    n_f: int
    n_v_mean: float

    def __post_init__(self):
        if self.var_hat < 0:
            raise MosBoundsError("MOS variance estimate must be non-negative")
        if not self.n_v_mean > 0:
            raise MosBoundsError("average votes per file must be positive")


@dataclass(frozen=True)
class TestSummary:
    """Summary statistics of a test whose per-file data is not at hand."""

    name: str
    scale: RatingScale
    stats: SampleStats
    vote_variance: float | None = None

    __test__ = False  # not a pytest class


def sample_stats(ds: MosDataset) -> SampleStats:
    """MOS mean, MOS variance (``n_f - 1`` denominator) and mean votes per file."""
    if len(ds) < 2:
        raise TooFewFilesError(f"{ds.name}: need at least two files, got {len(ds)}")
    x = ds.mos
    return SampleStats(float(x.mean()), float(x.var(ddof=1)), len(x), float(ds.n_votes.mean()))


def _per_file_variances(ds: MosDataset, convention: str) -> tuple[np.ndarray, np.ndarray]:
    variances, counts = [], []
    excluded = 0
    for rec in ds.files:
        if rec.n_votes == 1:
            excluded += 1
            continue
        if rec.vote_variance is not None and convention == "unbiased":
            v = rec.vote_variance
        elif rec.raw_votes is not None:
            v = vote_variance(rec.raw_votes, convention)
        elif rec.vote_variance is not None:
            v = rec.vote_variance
        else:
            raise NoVarianceInfoError(f"{ds.name}: file {rec.file_id} has no vote variance")
        variances.append(v)
        counts.append(rec.n_votes)
    if excluded:
        warnings.warn(f"{ds.name}: {excluded} single-vote file(s) left out of the vote variance",
                      ExcludedFilesWarning, stacklevel=3)
    if not variances:
        raise NoVarianceInfoError(f"{ds.name}: no file carries vote variance information")
    return np.array(variances), np.array(counts, dtype=float)


def observed_vote_variance(ds: MosDataset | TestSummary, convention: str = "unbiased") -> float:
    """Average observed per-file vote variance."""
    if isinstance(ds, TestSummary):
        if ds.vote_variance is None:
            raise NoVarianceInfoError(f"{ds.name}: no vote variance recorded")
        return float(ds.vote_variance)
    variances, _ = _per_file_variances(ds, convention)
    return float(variances.mean())


def _observed_values(datasets, convention) -> tuple[RatingScale, list[float]]:
    datasets = list(datasets)
    if not datasets:
        raise MosBoundsError("no datasets given")
    scales = {d.scale for d in datasets}
    if len(scales) > 1:
        raise MixedScalesError("a global vote variance needs every test on one rating scale")
    return scales.pop(), [observed_vote_variance(d, convention) for d in datasets]


def global_average_vote_variance(datasets: Iterable[MosDataset | TestSummary],
                                 convention: str = "unbiased") -> float:
    """Unweighted mean of the per-test observed vote variances."""
    _, values = _observed_values(datasets, convention)
    return statistics.fmean(values)


def vote_variance_spread(datasets: Iterable[MosDataset | TestSummary],
                         convention: str = "unbiased") -> float:
    """Standard deviation (population form) of the per-test observed vote variances."""
    _, values = _observed_values(datasets, convention)
    return statistics.pstdev(values)


def binovotes_vote_variance(stats: SampleStats, scale: RatingScale) -> float:
    """Expected vote variance BinoVotes implies for a MOS sample.

    ``n_v / (n_m - 1) * ((mu - s_L)(s_H - mu) - var_X)`` with
    ``n_m = n_v (n_s - 1)``.
    """
    n_m = stats.n_v_mean * (scale.n_s - 1)
    if n_m <= 1:
        raise DegenerateError(f"n_m={n_m:g} must exceed 1")
    if not scale.contains(stats.mu_hat):
        raise OutOfRangeError(f"MOS mean {stats.mu_hat} outside the scale")
    room = float(scale.parabola(stats.mu_hat)) - stats.var_hat
    if room <= 0:
        raise InfeasibleMomentsError(
            f"MOS variance {stats.var_hat} is not below (mu - s_L)(s_H - mu) = "
            f"{scale.parabola(stats.mu_hat):.4g}"
        )
    return stats.n_v_mean / (n_m - 1) * room


def quality_variance_estimate(stats: SampleStats, vote_variance: float) -> float:
    """True-quality variance estimate: MOS variance less the vote noise."""
    out = stats.var_hat - vote_variance / stats.n_v_mean
    if out < 0:
        raise InfeasibleMomentsError(
            f"vote noise {vote_variance / stats.n_v_mean:.4g} exceeds MOS variance {stats.var_hat:.4g}"
        )
    return out


def bounds_from_stats(stats: SampleStats, vote_var: float, source: str,
                      mse: float | None = None) -> BoundReport:
    """Bound estimates for given MOS statistics and expected vote variance.

    ``mse`` overrides ``vote_var / n_v`` (used by the per-file exact mode).
    """
    n_v = stats.n_v_mean
    if mse is None:
        mse = mse_lower_bound(vote_var, n_v)
    pcc = pcc_upper_bound_from_mosvar(stats.var_hat, mse * n_v, n_v)
    return BoundReport(
        mse_bound=mse,
        pcc_bound=pcc,
        variance_source=source,
        inputs=BoundInputs(n_v, mse * n_v, stats.var_hat - mse, stats.var_hat),
    )


def _stats_of(ds: MosDataset | TestSummary) -> SampleStats:
    return ds.stats if isinstance(ds, TestSummary) else sample_stats(ds)


def estimate_bounds(ds: MosDataset | TestSummary, mode: str = "data", *,
                    global_var: float = GLOBAL_VOTE_VARIANCE,
                    global_scale: RatingScale = MOS_SCALE,
                    exact: bool = False,
                    convention: str = "unbiased") -> BoundReport:
    """RMSE/PCC bound estimates for a dataset using one vote-variance source.

    ``mode`` is ``data``, ``global`` or ``binovotes``. ``exact`` (data mode
    only) averages ``sigma_i^2 / n_i`` per file instead of dividing the mean
    vote variance by the mean vote count.
    """
    try:
        source = _MODE_ALIASES[mode]
    except KeyError:
        raise ValueError(f"unknown mode {mode!r}") from None
    stats = _stats_of(ds)
    if source == DATA_DRIVEN:
        if exact and isinstance(ds, MosDataset):
            variances, counts = _per_file_variances(ds, convention)
            mse = float(np.mean(variances / counts))
            return bounds_from_stats(stats, mse * stats.n_v_mean, source, mse=mse)
        return bounds_from_stats(stats, observed_vote_variance(ds, convention), source)
    if source == GLOBAL_AVERAGE:
        if ds.scale != global_scale:
            raise MixedScalesError(
                f"the global vote variance was measured on {global_scale}, "
                f"but {ds.name} uses {ds.scale}"
            )
        return bounds_from_stats(stats, global_var, source)
    return bounds_from_stats(stats, binovotes_vote_variance(stats, ds.scale), source)


def estimate_all(ds: MosDataset | TestSummary, **kwargs) -> list[BoundReport]:
    """Every applicable mode, data-driven first when variance information exists."""
    if isinstance(ds, TestSummary):
        has_info = ds.vote_variance is not None
    else:
        has_info = ds.has_variance_info()
    modes = (["data"] if has_info else []) + ["global", "binovotes"]
    out = []
    for mode in modes:
        if mode == "global" and ds.scale != kwargs.get("global_scale", MOS_SCALE):
            continue
        out.append(estimate_bounds(ds, mode, **kwargs))
    return out


@dataclass(frozen=True)
class CoverageResult:
    passed: bool
    counts: tuple[int, ...]
    edges: tuple[float, ...] = field(repr=False)

    @property
    def empty_bins(self) -> list[int]:
        """1-based indices of empty bins."""
        return [i + 1 for i, c in enumerate(self.counts) if c == 0]


def range_coverage_check(ds: MosDataset) -> CoverageResult:
    """Does the MOS sample reach every part of the scale?

    The scale is cut into ``2 (n_s - 1)`` equal bins (eight half-point bins
    on 1-5) and every bin must hold at least one MOS. A value on an interior
    edge counts toward the lower bin; ``s_L`` goes to the first bin.
    """
    scale = ds.scale
    n_bins = 2 * (scale.n_s - 1)
    width = scale.width / n_bins
    counts = [0] * n_bins
    for x in ds.mos:
        b = math.ceil((x - scale.s_L) / width - 1e-9) - 1
        counts[min(max(b, 0), n_bins - 1)] += 1
    edges = tuple(scale.s_L + i * width for i in range(n_bins + 1))
    return CoverageResult(all(c > 0 for c in counts), tuple(counts), edges)
