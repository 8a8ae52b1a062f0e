"""Exception types raised across the package.

Every error derives from :class:`MosBoundsError`, which is itself a
``ValueError`` so callers that only care about bad input can catch that.
"""

from __future__ import annotations


class MosBoundsError(ValueError):
    """Base class for all package errors."""


class InvalidScaleError(MosBoundsError):
    """Rating scale parameters are inconsistent (bounds or level count)."""


class InvalidVotesError(MosBoundsError):
    """Votes-per-file count is not usable."""


class OutOfRangeError(MosBoundsError):
    """A quality or MOS value lies outside the scale support."""


class InfeasibleMomentsError(MosBoundsError):
    """Mean/variance pair cannot belong to any law on the scale support."""


class DegenerateError(MosBoundsError):
    """A variance that must be positive is zero or negative."""


class NoiseExceedsSignalError(MosBoundsError):
    """Vote noise alone explains all of the MOS variance.

    ``ratio`` is the offending ``(vote_variance / n_v) / var_X``; a value of
    one or more means the PCC bound is undefined.
    """

    def __init__(self, message: str, ratio: float):
        super().__init__(message)
        self.ratio = ratio


class UnsupportedDistributionError(MosBoundsError):
    """Operation needs a density or sampler the distribution lacks."""


class NoVarianceInfoError(MosBoundsError):
    """Dataset carries no per-file vote variance."""


class MixedScalesError(MosBoundsError):
    """Datasets on different rating scales were combined."""


class TooFewFilesError(MosBoundsError):
    """Fewer than two files; the MOS variance is not estimable."""


class ParseError(MosBoundsError):
    """Malformed input file. ``line`` is 1-based, or ``None`` if file-level."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class OffScaleVoteError(ParseError):
    """A vote is not one of the rating scale's levels."""


class DuplicateVoteError(ParseError):
    """The same subject voted twice on the same file."""


class EmptyFileError(ParseError):
    """Input file has a header (or nothing) but no data rows."""
