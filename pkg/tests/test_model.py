import itertools
from fractions import Fraction
from math import comb

import numpy as np
import pytest
from scipy import integrate, stats

from mosbounds.errors import InfeasibleMomentsError, OutOfRangeError, UnsupportedDistributionError
from mosbounds.model import BinoVotes, beta_binomial_pmf, empirical_vote_fractions
from mosbounds.quality import EmpiricalMoments, PointMass, ScaledBeta, Triangular, Uniform
from mosbounds.scale import MOS_SCALE, make_scale

BV = BinoVotes(MOS_SCALE)
SCALES = [MOS_SCALE, make_scale(0, 10, 11), make_scale(0, 1, 2), make_scale(-2, 7, 4)]


class TestVotePmf:
    def test_low_end(self):
        assert BV.vote_pmf(1.0).tolist() == [1, 0, 0, 0, 0]

    def test_high_end(self):
        assert BV.vote_pmf(5.0).tolist() == [0, 0, 0, 0, 1]

    def test_centre(self):
        np.testing.assert_allclose(BV.vote_pmf(3.0), np.array([1, 4, 6, 4, 1]) / 16, atol=1e-15)

    def test_centre_moments(self):
        p = BV.vote_pmf(3.0)
        lv = MOS_SCALE.levels
        assert p @ lv == pytest.approx(3.0)
        assert p @ (lv - 3) ** 2 == pytest.approx(1.0)

    def test_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            BV.vote_pmf(0.5)

    @pytest.mark.parametrize("scale", SCALES, ids=str)
    def test_well_behaved_and_variance_law(self, scale):
        m = BinoVotes(scale)
        for y in np.linspace(scale.s_L, scale.s_H, 101):
            p = m.vote_pmf(y)
            assert p.sum() == pytest.approx(1.0, abs=1e-12)
            mean = p @ scale.levels
            assert abs(mean - y) < 1e-10
            var = p @ (scale.levels - mean) ** 2
            assert abs(var - m.vote_variance(y)) < 1e-10

    @pytest.mark.parametrize("scale", SCALES, ids=str)
    def test_zero_variance_at_ends(self, scale):
        m = BinoVotes(scale)
        assert m.vote_variance(scale.s_L) == 0.0
        assert m.vote_variance(scale.s_H) == 0.0


class TestVoteVariance:
    def test_values(self):
        assert BV.vote_variance(3.0) == 1.0
        assert BV.vote_variance(2.0) == 0.75

    def test_maximum_at_centre(self):
        y = np.linspace(1, 5, 401)
        assert y[np.argmax(BV.vote_variance(y))] == pytest.approx(3.0)

    def test_point_mass(self):
        assert BV.expected_vote_variance(3.0, 0.0) == 1.0

    @pytest.mark.parametrize("d", [Uniform(), ScaledBeta(2, 2.5), ScaledBeta(2, 2), Triangular(3.0)],
                             ids=lambda d: d.name)
    def test_expected_against_quadrature(self, d):
        pts = list(d.breakpoints) or None
        quad = integrate.quad(lambda y: BV.vote_variance(y) * d.pdf(y), 1, 5, points=pts,
                              epsabs=1e-13)[0]
        assert BV.expected_vote_variance(d.mean(), d.variance()) == pytest.approx(quad, abs=1e-9)

    def test_uniform_value(self):
        assert BV.expected_vote_variance(3.0, 4 / 3) == pytest.approx(2 / 3)

    def test_beta_value(self):
        d = ScaledBeta(2, 2.5)
        # exact value 80/99; plugging the rounded moments (2.778, 0.718) gives ~0.808
        assert BV.expected_vote_variance(d.mean(), d.variance()) == pytest.approx(80 / 99, abs=1e-12)
        assert BV.expected_vote_variance(2.778, 0.718) == pytest.approx(0.809, abs=1.5e-3)

    def test_infeasible(self):
        with pytest.raises(InfeasibleMomentsError):
            BV.expected_vote_variance(4.5, 2.0)


def _enumerated_pmf(scale, y_frac, n_v):
    """Exact MOS PMF for a fixed quality by enumerating every vote tuple."""
    n = scale.n_s - 1
    p = y_frac
    single = [comb(n, k) * p**k * (1 - p) ** (n - k) for k in range(n + 1)]
    out = [Fraction(0)] * (n * n_v + 1)
    for combo in itertools.product(range(n + 1), repeat=n_v):
        prob = Fraction(1)
        for k in combo:
            prob *= single[k]
        out[sum(combo)] += prob
    return out


class TestBinoMosPmf:
    def test_single_vote_point_mass(self):
        pmf = BV.binomos_pmf(PointMass(3.0), 1)
        np.testing.assert_allclose(pmf.probabilities, BV.vote_pmf(3.0), atol=1e-15)

    @pytest.mark.parametrize("n_v", [1, 2, 3, 4])
    @pytest.mark.parametrize("p", [Fraction(1, 2), Fraction(3, 10), Fraction(7, 8), Fraction(0)])
    @pytest.mark.parametrize("scale", [MOS_SCALE, make_scale(0, 1, 3)], ids=str)
    def test_point_mass_vs_enumeration(self, scale, p, n_v):
        y = scale.s_L + float(p) * scale.width
        exact = _enumerated_pmf(scale, p, n_v)
        got = BinoVotes(scale).binomos_pmf(PointMass(y, scale.s_L, scale.s_H), n_v).probabilities
        np.testing.assert_allclose(got, [float(f) for f in exact], rtol=0, atol=1e-14)

    @pytest.mark.parametrize("n_v", [1, 2, 4, 8, 16, 32, 37])
    @pytest.mark.parametrize("ab", [(2, 2.5), (2, 2), (3.5, 1.5), (5, 9), (1.5, 1.2), (1, 1)])
    def test_quadrature_vs_beta_binomial(self, ab, n_v):
        d = ScaledBeta(*ab)
        quad = BV.binomos_pmf(d, n_v, method="quadrature").probabilities
        closed = BV.binomos_pmf(d, n_v, method="closed").probabilities
        np.testing.assert_allclose(quad, closed, rtol=0, atol=1e-8)

    def test_beta_binomial_vs_scipy(self):
        for n, a, b in [(4, 2, 2.5), (64, 2, 2), (150, 3, 7)]:
            np.testing.assert_allclose(beta_binomial_pmf(n, a, b),
                                       stats.betabinom.pmf(np.arange(n + 1), n, a, b), atol=1e-13)

    DISTS = [Uniform(), Triangular(3.0), Triangular(1.5), ScaledBeta(2, 2), ScaledBeta(2, 2.5),
             PointMass(2.2), Uniform(2.0, 4.0)]

    @pytest.mark.parametrize("d", DISTS, ids=lambda d: d.name)
    def test_normalisation_mean_variance(self, d):
        for n_v in range(1, 33):
            pmf = BV.binomos_pmf(d, n_v)
            assert np.all(pmf.probabilities >= 0)
            assert pmf.probabilities.sum() == pytest.approx(1.0, abs=1e-9)
            assert pmf.mean() == pytest.approx(d.mean(), abs=1e-9)
            assert pmf.variance() == pytest.approx(
                BV.binomos_variance(d.mean(), d.variance(), n_v), abs=1e-9)

    def test_sharpens_toward_density(self):
        # PMF mass per lattice step approaches the beta density as n_v grows
        d = ScaledBeta(2, 2.5)
        errors = []
        for n_v in (1, 4, 16):
            pmf = BV.binomos_pmf(d, n_v)
            dens = pmf.probabilities * pmf.lattice.n_m / 4 * (pmf.lattice.n_m + 1) / pmf.lattice.n_m
            errors.append(np.max(np.abs(dens - d.pdf(pmf.points))))
        assert errors[0] > errors[1] > errors[2]

    def test_unsupported(self):
        with pytest.raises(UnsupportedDistributionError):
            BV.binomos_pmf(EmpiricalMoments(3, 1), 2)
        with pytest.raises(UnsupportedDistributionError):
            BV.binomos_pmf(Uniform(), 2, method="closed")


class TestBinoMosVariance:
    def test_single_vote_point(self):
        assert BV.binomos_variance(3.0, 0.0, 1) == 1.0

    def test_large_nv_limit(self):
        assert BV.binomos_variance(3.0, 4 / 3, 10**9) == pytest.approx(4 / 3, abs=1e-8)

    def test_uniform_four_votes(self):
        v = BV.binomos_variance(3.0, 4 / 3, 4)
        assert v == pytest.approx(1.5)
        assert v - 4 / 3 == pytest.approx((2 / 3) / 4)


class TestSampling:
    def test_ends(self):
        rng = np.random.default_rng(0)
        assert np.all(BV.sample_votes(1.0, rng, 100) == 1.0)
        assert np.all(BV.sample_votes(5.0, rng, 100) == 5.0)
        assert BV.sample_vote(5.0, rng) == 5.0

    def test_centre_statistics(self):
        n = 10**6
        v = BV.sample_votes(3.0, np.random.default_rng(9), n)
        assert set(np.unique(v)) <= {1.0, 2.0, 3.0, 4.0, 5.0}
        assert abs(v.mean() - 3.0) < 5 * np.sqrt(1.0 / n)
        # fourth central moment of Binomial(4, 1/2) is 2.5
        assert abs(v.var(ddof=1) - 1.0) < 5 * np.sqrt((2.5 - 1.0) / n)

    def test_mos_on_lattice(self):
        x = BV.sample_mos(np.linspace(1, 5, 50), 5, np.random.default_rng(2))
        k = (x - 1) / 4 * 20
        assert np.allclose(k, np.round(k), atol=1e-12)
        assert BV.sample_mos(5.0, 7, np.random.default_rng(2)) == 5.0

    def test_mos_single_vote_matches_vote(self):
        a = BV.sample_mos(3.3, 1, np.random.default_rng(4), size=20000)
        freq = np.bincount((a - 1).astype(int), minlength=5) / a.size
        np.testing.assert_allclose(freq, BV.vote_pmf(3.3), atol=0.015)

    def test_mos_variance(self):
        n = 10**5
        x = BV.sample_mos(3.0, 16, np.random.default_rng(11), size=n)
        target = 1.0 / 16
        # MOS is Binomial(64, 1/2)/16 + 1; fourth central moment from scipy
        m4 = stats.binom(64, 0.5).moment(4) - 4 * 32 * stats.binom(64, 0.5).moment(3) \
            + 6 * 32**2 * stats.binom(64, 0.5).moment(2) - 3 * 32**4
        m4 /= 16**4
        se = np.sqrt((m4 - target**2) / n)
        assert abs(x.var(ddof=1) - target) < 5 * se


class TestBias:
    def test_zero_shift(self):
        np.testing.assert_array_equal(BV.biased_vote_pmf(2.7, 0.0), BV.vote_pmf(2.7))

    def test_shift_moves_mean(self):
        assert BV.biased_vote_pmf(3.0, 0.5) @ MOS_SCALE.levels == pytest.approx(3.5)

    def test_clamped_top(self):
        assert BV.biased_vote_pmf(5.0, 0.3).tolist() == [0, 0, 0, 0, 1]


def test_empirical_fractions():
    mos = [1.0, 3.0, 3.1]
    votes = [[1] * 30, [2, 3, 4] * 10, [3] * 5]
    centres, frac = empirical_vote_fractions(mos, votes, MOS_SCALE)
    assert centres.tolist() == [1.125, 3.125]
    np.testing.assert_allclose(frac[0], [1, 0, 0, 0, 0])
    np.testing.assert_allclose(frac[1], [0, 10 / 35, 15 / 35, 10 / 35, 0])
