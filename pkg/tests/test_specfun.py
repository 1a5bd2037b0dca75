"""Numeric kernel tests against closed forms and quadrature oracles."""

import math

import numpy as np
import pytest
from scipy import integrate

from coagfrag import specfun
from coagfrag.errors import DomainError


def levy_half_density(t):
    # closed form for index 1/2, itself validated by the Laplace checks below
    return t ** -1.5 * math.exp(-1.0 / (4.0 * t)) / (2.0 * math.sqrt(math.pi))


class TestStableIndex:
    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.3, float("nan")])
    def test_rejects_endpoints_and_outside(self, bad):
        with pytest.raises(DomainError):
            specfun.StableIndex(bad)

    def test_accepts_interior(self):
        assert specfun.StableIndex(0.5).alpha == 0.5


class TestLaplaceExponent:
    def test_zero(self):
        for a in (0.2, 0.5, 0.8):
            assert specfun.gg_laplace_exponent(a, 0.0) == 0.0

    def test_closed_values(self):
        assert specfun.gg_laplace_exponent(0.5, 3.0) == pytest.approx(1.0, abs=1e-14)
        assert specfun.gg_laplace_exponent(0.5, 8.0) == pytest.approx(2.0, abs=1e-14)

    def test_monotone_and_concave(self):
        w = np.linspace(0.0, 10.0, 200)
        for a in (0.3, 0.5, 0.7):
            vals = specfun.gg_laplace_exponent(a, w)
            assert np.all(np.diff(vals) > 0)
            second = np.diff(vals, 2)
            assert np.all(second <= 1e-12)

    def test_negative_omega_rejected(self):
        with pytest.raises(DomainError):
            specfun.gg_laplace_exponent(0.5, -0.1)


class TestStableDensity:
    def test_half_closed_form(self):
        for t in np.linspace(0.05, 20.0, 40):
            assert specfun.stable_density(0.5, t) == pytest.approx(
                levy_half_density(t), abs=1e-8)

    def test_laplace_transform(self):
        for a in (0.3, 0.5, 0.7):
            for w in (0.5, 1.0, 2.0):
                val, _ = integrate.quad(
                    lambda t: math.exp(-w * t) * specfun.stable_density(a, t),
                    0, np.inf, limit=200)
                assert val == pytest.approx(math.exp(-(w ** a)), abs=1e-5)

    def test_normalization(self):
        val, _ = integrate.quad(lambda t: specfun.stable_density(0.7, t),
                                0, np.inf, limit=200)
        assert val == pytest.approx(1.0, abs=1e-3)

    def test_domain(self):
        with pytest.raises(DomainError):
            specfun.stable_density(0.5, 0.0)
        with pytest.raises(DomainError):
            specfun.stable_density(0.5, -1.0)

    def test_quadrature_config_validation(self):
        with pytest.raises(DomainError):
            specfun.QuadratureConfig(abs_tol=0.0)
        with pytest.raises(DomainError):
            specfun.QuadratureConfig(max_panels=4)


class TestGGLevyTail:
    def test_against_quadrature(self):
        for a in (0.3, 0.5, 0.7):
            for x in (0.05, 0.5, 1.0, 5.0):
                oracle, err = integrate.quad(
                    lambda u: a / math.gamma(1 - a) * u ** (-a - 1) * math.exp(-u),
                    x, np.inf, limit=200)
                assert specfun.gg_levy_tail(a, x) == pytest.approx(oracle, rel=1e-9)

    def test_divergence_at_zero(self):
        assert specfun.gg_levy_tail(0.5, 1e-12) > 1e5

    def test_completely_monotone_on_grid(self):
        # alternating signs of successive finite differences on a uniform grid
        grid = np.linspace(0.05, 10.0, 400)
        for a in (0.3, 0.7):
            vals = specfun.gg_levy_tail(a, grid)
            d1 = np.diff(vals)
            d2 = np.diff(vals, 2)
            d3 = np.diff(vals, 3)
            assert np.all(d1 < 0)
            assert np.all(d2 > 0)
            assert np.all(d3 < 0)

    def test_domain(self):
        with pytest.raises(DomainError):
            specfun.gg_levy_tail(0.5, 0.0)


class TestGGLevyTailInverse:
    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7, 0.9])
    def test_roundtrip(self, alpha):
        for x in (1e-10, 1e-3, 0.2, 1.0, 5.0, 25.0):
            level = specfun.gg_levy_tail(alpha, x)
            if level <= 0:
                continue
            inv = specfun.gg_levy_tail_inverse(alpha, level)
            assert inv == pytest.approx(x, rel=1e-9)

    def test_small_level_grows(self):
        a = 0.5
        x1 = specfun.gg_levy_tail_inverse(a, 1e-3)
        x2 = specfun.gg_levy_tail_inverse(a, 1e-9)
        assert x2 > x1

    def test_large_level_near_zero(self):
        assert specfun.gg_levy_tail_inverse(0.5, 1e8) < 1e-10

    def test_bad_level(self):
        with pytest.raises(DomainError):
            specfun.gg_levy_tail_inverse(0.5, 0.0)
