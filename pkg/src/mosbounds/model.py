"""The BinoVotes vote model and the BinoMOS distribution it induces.

A BinoVotes vote for a file of true quality ``y`` is a binomial draw with
``n_s - 1`` trials and success probability ``(y - s_L)/(s_H - s_L)``, mapped
back onto the rating scale. The mean of ``n_v`` such votes (BinoMOS) is again
binomial, with ``n_m = n_v (n_s - 1)`` trials, on the MOS lattice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import stats
from scipy.special import betaln, gammaln

from .errors import InvalidVotesError, UnsupportedDistributionError
from .quality import PointMass, QualityDistribution, ScaledBeta, check_feasible
from .scale import MosLattice, RatingScale

QUADRATURE_NODES = 128

# empirical rating-probability curves: MOS bin width and minimum votes per kept bin
EMPIRICAL_BIN_WIDTH = 0.25
EMPIRICAL_MIN_VOTES = 20


def _log_binom_coef(n: int, k: np.ndarray) -> np.ndarray:
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def beta_binomial_pmf(n: int, alpha: float, beta: float) -> np.ndarray:
    """Beta-binomial masses for ``k = 0..n``, computed in log space."""
    k = np.arange(n + 1, dtype=float)
    logp = _log_binom_coef(n, k) + betaln(k + alpha, n - k + beta) - betaln(alpha, beta)
    return np.exp(logp)


def _gauss_legendre(a: float, b: float, n: int = QUADRATURE_NODES):
    """Nodes/weights on ``[a, b]`` after the map ``y = a + (b - a) sin^2(pi u / 2)``.

    The map flattens algebraic endpoint behaviour such as ``(1 - t)^0.5`` in a
    beta density, which plain Gauss-Legendre integrates poorly. Densities
    that are unbounded at an end (beta shape below 1) still lose accuracy.
    """
    x, w = leggauss(n)
    u = (x + 1) / 2
    y = a + (b - a) * np.sin(np.pi * u / 2) ** 2
    jac = (b - a) * np.pi / 2 * np.sin(np.pi * u)
    return y, w / 2 * jac


@dataclass(frozen=True)
class BinoMosPmf:
    lattice: MosLattice
    probabilities: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return self.lattice.points

    def mean(self) -> float:
        return float(np.dot(self.points, self.probabilities))

    def variance(self) -> float:
        m = self.mean()
        return float(np.dot((self.points - m) ** 2, self.probabilities))


def _check_nv(n_v) -> None:
    if not n_v > 0:
        raise InvalidVotesError(f"n_v={n_v} must be positive")


@dataclass(frozen=True)
class BinoVotes:
    """BinoVotes model on a given rating scale."""

    scale: RatingScale

    @property
    def trials(self) -> int:
        return self.scale.n_s - 1

    def success_prob(self, y):
        """Binomial success parameter for quality ``y`` (range-checked)."""
        if np.ndim(y) == 0:
            return float(self.scale.to_unit(self.scale.check(y)))
        y = np.asarray(y, dtype=float)
        for v in (y.min(), y.max()):
            self.scale.check(v)
        return np.clip(self.scale.to_unit(y), 0.0, 1.0)

    def vote_pmf(self, y: float) -> np.ndarray:
        """Probability of each rating level given true quality ``y``."""
        p = self.success_prob(y)
        return stats.binom.pmf(np.arange(self.scale.n_s), self.trials, p)

    def biased_vote_pmf(self, y: float, delta: float) -> np.ndarray:
        """Vote PMF for a subject whose conditional mean is shifted by ``delta``.

        The shifted quality is clamped to the scale, so near the ends the
        shift is only partly realised.
        """
        self.scale.check(y)
        shifted = min(max(y + delta, self.scale.s_L), self.scale.s_H)
        return self.vote_pmf(shifted)

    def vote_variance(self, y):
        """Conditional vote variance ``(y - s_L)(s_H - y)/(n_s - 1)``."""
        if np.ndim(y) == 0:
            y = self.scale.check(y)
        else:
            self.success_prob(y)
        return self.scale.parabola(y) / self.trials

    def expected_vote_variance(self, mu_Y: float, var_Y: float) -> float:
        """``E[v_r(Y)]`` from the first two moments of the quality law."""
        check_feasible(mu_Y, var_Y, self.scale.s_L, self.scale.s_H)
        return float((self.scale.parabola(mu_Y) - var_Y) / self.trials)

    def binomos_variance(self, mu_Y: float, var_Y: float, n_v: float) -> float:
        """Variance of the MOS over ``n_v`` BinoVotes."""
        check_feasible(mu_Y, var_Y, self.scale.s_L, self.scale.s_H)
        _check_nv(n_v)
        n_m = n_v * self.trials
        return float((self.scale.parabola(mu_Y) + (n_m - 1) * var_Y) / n_m)

    def sample_votes(self, y, rng: np.random.Generator, size=None) -> np.ndarray:
        """Draw votes for quality ``y`` (broadcast against ``size``)."""
        p = self.success_prob(y)
        k = rng.binomial(self.trials, p, size=size)
        return self.scale.levels[k]

    def sample_vote(self, y: float, rng: np.random.Generator) -> float:
        return float(self.sample_votes(y, rng))

    def sample_mos(self, y, n_v: int, rng: np.random.Generator, size=None) -> np.ndarray | float:
        """Mean of ``n_v`` independent votes per quality value, on the MOS lattice."""
        lattice = MosLattice(self.scale, n_v)
        p = self.success_prob(y)
        shape = np.shape(p) if size is None else tuple(np.atleast_1d(size))
        k = rng.binomial(self.trials, np.asarray(p)[..., None], size=shape + (n_v,)).sum(axis=-1)
        out = lattice.points[k]
        return float(out) if np.ndim(out) == 0 else out

    def binomos_pmf(self, dist: QualityDistribution, n_v: int, method: str = "auto") -> BinoMosPmf:
        """PMF of the MOS over ``n_v`` votes when quality follows ``dist``.

        ``method`` is ``"auto"``, ``"quadrature"`` or ``"closed"``. The closed
        form exists for point masses (binomial) and for beta laws spanning the
        whole scale (beta-binomial); everything else uses 128-node
        Gauss-Legendre on each smooth piece of the density (after a cosine
        change of variable that tames endpoint singularities).
        """
        lattice = MosLattice(self.scale, n_v)
        n_m = lattice.n_m
        if not dist.has_density and not isinstance(dist, PointMass):
            raise UnsupportedDistributionError(f"{dist.name} has no density")
        full_support = (dist.lo, dist.hi) == (self.scale.s_L, self.scale.s_H)
        closed_ok = isinstance(dist, PointMass) or (isinstance(dist, ScaledBeta) and full_support)
        if method == "closed" and not closed_ok:
            raise UnsupportedDistributionError(f"no closed form for {dist.name}")
        if method not in ("auto", "closed", "quadrature"):
            raise ValueError(f"unknown method {method!r}")

        if isinstance(dist, PointMass):
            p = self.success_prob(dist.y0)
            probs = stats.binom.pmf(np.arange(n_m + 1), n_m, p)
        elif method != "quadrature" and closed_ok:
            probs = beta_binomial_pmf(n_m, dist.alpha, dist.beta)
        else:
            probs = self.quadrature_pmf(dist, n_m)
        return BinoMosPmf(lattice, probs)

    def quadrature_pmf(self, dist: QualityDistribution, n_m: int) -> np.ndarray:
        """Masses on the ``n_m``-step lattice by numerical integration over ``dist``."""
        self.scale.check(dist.lo)
        self.scale.check(dist.hi)
        edges = [dist.lo, *sorted(dist.breakpoints), dist.hi]
        nodes, weights = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            x, w = _gauss_legendre(a, b)
            nodes.append(x)
            weights.append(w)
        y = np.concatenate(nodes)
        w = np.concatenate(weights) * dist.pdf(y)
        t = np.clip(self.scale.to_unit(y), 1e-300, 1.0)
        s = np.clip(1.0 - self.scale.to_unit(y), 1e-300, 1.0)
        k = np.arange(n_m + 1, dtype=float)[:, None]
        log_kernel = _log_binom_coef(n_m, k) + k * np.log(t) + (n_m - k) * np.log(s)
        return np.exp(log_kernel) @ w


def empirical_vote_fractions(mos, votes_per_file, scale: RatingScale,
                             bin_width: float = EMPIRICAL_BIN_WIDTH,
                             min_votes: int = EMPIRICAL_MIN_VOTES):
    """Per-MOS-bin fraction of votes at each rating level.

    ``votes_per_file`` is a sequence of vote arrays aligned with ``mos``.
    Returns ``(bin_centres, fractions)`` where ``fractions`` has one row per
    bin with at least ``min_votes`` votes and one column per level.
    """
    n_bins = int(round(scale.width / bin_width))
    counts = np.zeros((n_bins, scale.n_s))
    for x, votes in zip(mos, votes_per_file):
        b = min(int((x - scale.s_L) / bin_width), n_bins - 1)
        for v in votes:
            counts[b, scale.level_index(v)] += 1
    totals = counts.sum(axis=1)
    keep = totals >= min_votes
    centres = scale.s_L + (np.arange(n_bins) + 0.5) * bin_width
    return centres[keep], counts[keep] / totals[keep, None]
