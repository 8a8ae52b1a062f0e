import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from mosbounds.errors import InfeasibleMomentsError, UnsupportedDistributionError
from mosbounds.quality import (
    EmpiricalMoments,
    PointMass,
    ScaledBeta,
    Triangular,
    Uniform,
    parse_distribution,
)
from mosbounds.scale import MOS_SCALE

DENSITIES = [Uniform(), Triangular(3.0), ScaledBeta(2, 2), ScaledBeta(2, 2.5), Triangular(1.0)]


def _moments_by_quad(d):
    pts = list(d.breakpoints) or None
    mass = integrate.quad(d.pdf, d.lo, d.hi, points=pts, epsabs=1e-13)[0]
    mean = integrate.quad(lambda y: y * d.pdf(y), d.lo, d.hi, points=pts, epsabs=1e-13)[0]
    var = integrate.quad(lambda y: (y - mean) ** 2 * d.pdf(y), d.lo, d.hi, points=pts, epsabs=1e-13)[0]
    return mass, mean, var


class TestMoments:
    def test_uniform(self):
        assert Uniform().mean() == 3.0
        assert Uniform().variance() == pytest.approx(16 / 12)

    def test_beta(self):
        d = ScaledBeta(2, 2.5)
        assert d.mean() == pytest.approx(1 + 4 * 2 / 4.5)
        assert d.mean() == pytest.approx(2.778, abs=5e-4)
        assert d.variance() == pytest.approx(16 * 5 / (4.5**2 * 5.5))
        assert d.variance() == pytest.approx(0.718, abs=5e-4)

    def test_point_mass(self):
        d = PointMass(3.3)
        assert d.mean() == 3.3 and d.variance() == 0.0

    @pytest.mark.parametrize("d", DENSITIES, ids=lambda d: d.name)
    def test_against_quadrature(self, d):
        mass, mean, var = _moments_by_quad(d)
        assert mass == pytest.approx(1.0, abs=1e-9)
        assert d.mean() == pytest.approx(mean, abs=1e-9)
        assert d.variance() == pytest.approx(var, abs=1e-9)


class TestPdf:
    def test_uniform(self):
        assert Uniform().pdf(2.0) == 0.25

    def test_triangle_peak(self):
        assert Triangular(3.0).pdf(3.0) == pytest.approx(0.5)

    @pytest.mark.parametrize("d", DENSITIES, ids=lambda d: d.name)
    def test_nonnegative_and_zero_outside(self, d):
        y = np.linspace(0, 6, 601)
        f = d.pdf(y)
        assert np.all(f >= 0)
        assert np.all(f[(y < 1) | (y > 5)] == 0)

    @pytest.mark.parametrize("d", [PointMass(3.0), EmpiricalMoments(3.0, 1.0)], ids=lambda d: d.name)
    def test_no_density(self, d):
        with pytest.raises(UnsupportedDistributionError):
            d.pdf(3.0)


class TestSampling:
    def test_point_mass(self):
        out = PointMass(3.3).sample(np.random.default_rng(0), 4)
        assert out.tolist() == [3.3] * 4

    def test_moments_unsampleable(self):
        with pytest.raises(UnsupportedDistributionError):
            EmpiricalMoments(3.0, 1.0).sample(np.random.default_rng(0), 3)

    def test_deterministic(self):
        a = ScaledBeta(2, 2.5).sample(np.random.default_rng(5), 100)
        b = ScaledBeta(2, 2.5).sample(np.random.default_rng(5), 100)
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("d", DENSITIES, ids=lambda d: d.name)
    def test_moment_convergence(self, d):
        n = 10**6
        x = d.sample(np.random.default_rng(1234), n)
        assert x.min() >= 1 and x.max() <= 5
        se_mean = np.sqrt(d.variance() / n)
        assert abs(x.mean() - d.mean()) < 5 * se_mean
        # standard error of the sample variance from the fourth central moment
        m4 = np.mean((x - d.mean()) ** 4)
        se_var = np.sqrt((m4 - d.variance() ** 2) / n)
        assert abs(x.var(ddof=1) - d.variance()) < 5 * se_var


def _feasible_dists():
    lo = st.floats(-10, 10)
    width = st.floats(0.1, 20)
    return st.one_of(
        st.builds(lambda a, w: Uniform(a, a + w), lo, width),
        st.builds(lambda a, w, al, be: ScaledBeta(al, be, a, a + w), lo, width,
                  st.floats(0.1, 50), st.floats(0.1, 50)),
        st.builds(lambda a, w, t: Triangular(a + t * w, a, a + w), lo, width, st.floats(0, 1)),
        st.builds(lambda a, w, t: PointMass(a + t * w, a, a + w), lo, width, st.floats(0, 1)),
    )


@settings(max_examples=300, deadline=None)
@given(_feasible_dists())
def test_feasibility_bound(d):
    m, v = d.mean(), d.variance()
    assert d.lo <= m <= d.hi
    assert 0 <= v <= (m - d.lo) * (d.hi - m) * (1 + 1e-12) + 1e-12


class TestEmpiricalMoments:
    def test_infeasible(self):
        with pytest.raises(InfeasibleMomentsError):
            EmpiricalMoments(4.5, 2.0)

    def test_carries_moments(self):
        d = EmpiricalMoments(2.9, 0.8)
        assert (d.mean(), d.variance()) == (2.9, 0.8)


class TestParse:
    @pytest.mark.parametrize("text,cls", [
        ("uniform", Uniform), ("beta:2:2.5", ScaledBeta), ("tri:3", Triangular),
        ("point:3.3", PointMass), ("moments:3:1", EmpiricalMoments),
    ])
    def test_kinds(self, text, cls):
        d = parse_distribution(text, MOS_SCALE)
        assert isinstance(d, cls) and (d.lo, d.hi) == (1, 5)

    @pytest.mark.parametrize("text", ["gauss", "beta:2", "tri:x", "uniform:1"])
    def test_bad(self, text):
        with pytest.raises(ValueError):
            parse_distribution(text, MOS_SCALE)
