"""Test machinery: exact KS statistic, asymptotic p-values, chi-square pooling."""

import math

import numpy as np
import pytest
from scipy import special, stats as sps

from coagfrag.errors import DomainError
from coagfrag.rng import SeedStream
from coagfrag.stats import (
    bootstrap_se_neglog_mean,
    chisq_two_sample,
    kolmogorov_sf,
    ks_two_sample,
)


class TestKolmogorovSF:
    def test_against_scipy(self):
        for lam in (0.2, 0.5, 1.0, 1.5, 2.0):
            assert kolmogorov_sf(lam) == pytest.approx(special.kolmogorov(lam), abs=1e-10)

    def test_limits(self):
        assert kolmogorov_sf(0.0) == 1.0
        assert kolmogorov_sf(5.0) < 1e-10


class TestKsTwoSample:
    def test_statistic_small_case(self):
        # hand-computed: x = [1,2,3], y = [1.5]: sup|F1-F2| at 1.5- is 1/3,
        # after 1.5 it is |1/3 - 1| = 2/3
        res = ks_two_sample([1.0, 2.0, 3.0], [1.5])
        assert res.statistic == pytest.approx(2 / 3)

    def test_matches_scipy_statistic(self):
        rng = SeedStream(1, 0).generator()
        x = rng.normal(size=500)
        y = rng.normal(0.2, size=700)
        ours = ks_two_sample(x, y)
        ref = sps.ks_2samp(x, y)
        assert ours.statistic == pytest.approx(ref.statistic, abs=1e-12)

    def test_ties_handled(self):
        x = [1.0, 1.0, 2.0]
        y = [1.0, 2.0, 2.0]
        res = ks_two_sample(x, y)
        assert res.statistic == pytest.approx(1 / 3)

    def test_null_calibration(self):
        rng = SeedStream(1, 1).generator()
        ps = []
        for _ in range(200):
            x = rng.normal(size=800)
            y = rng.normal(size=800)
            ps.append(ks_two_sample(x, y).p_value)
        ps = np.asarray(ps)
        # roughly uniform: mean near 1/2, few very small values
        assert abs(ps.mean() - 0.5) < 0.1
        assert (ps < 0.01).sum() <= 8

    def test_empty_rejected(self):
        with pytest.raises(DomainError):
            ks_two_sample([], [1.0])


class TestChisq:
    def test_identical_counts_pass(self):
        c = np.array([100, 200, 300, 50])
        res = chisq_two_sample(c, c)
        assert res.statistic == pytest.approx(0.0)
        assert res.p_value == pytest.approx(1.0)

    def test_matches_scipy_contingency(self):
        c1 = np.array([120, 90, 60, 30])
        c2 = np.array([100, 100, 70, 30])
        res = chisq_two_sample(c1, c2, min_expected=0.0)
        ref = sps.chi2_contingency(np.vstack([c1, c2]), correction=False)
        assert res.statistic == pytest.approx(ref.statistic, rel=1e-12)
        assert res.p_value == pytest.approx(ref.pvalue, rel=1e-9)

    def test_pooling_respects_floor(self):
        c1 = np.array([1000, 2, 1, 1, 996])
        c2 = np.array([998, 1, 2, 2, 997])
        res = chisq_two_sample(c1, c2, min_expected=5.0)
        assert res.n_cells < 5

    def test_null_calibration(self):
        rng = SeedStream(2, 0).generator()
        probs = np.array([0.5, 0.3, 0.15, 0.05])
        ps = []
        for _ in range(200):
            c1 = rng.multinomial(1000, probs)
            c2 = rng.multinomial(1000, probs)
            ps.append(chisq_two_sample(c1, c2).p_value)
        ps = np.asarray(ps)
        assert abs(ps.mean() - 0.5) < 0.12
        assert (ps < 0.01).sum() <= 8


class TestBootstrap:
    def test_se_scale(self):
        rng = SeedStream(3, 0).generator()
        vals = np.exp(-rng.exponential(size=20000))
        se = bootstrap_se_neglog_mean(vals, rng)
        # compare with the delta-method standard error
        delta = vals.std() / math.sqrt(vals.size) / vals.mean()
        assert se == pytest.approx(delta, rel=0.3)
