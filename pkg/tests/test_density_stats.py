"""Endpoint law, scale functions, and KS utilities."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from sle_lab.density import (
    DensitySpec,
    limit_scale_function,
    right_escape_probability,
    theoretical_endpoint_density,
)
from sle_lab.stats import ks_statistic, ks_threshold_one_sample, ks_threshold_two_sample

# Frozen: quad of cosh(x/2)^(-2/3) over R, cross-checked against a trapezoid
# rule on [-200, 200] (agreement 4e-15).
Z_KAPPA6 = 8.413092631952725


class TestDensitySpec:
    def test_normalizer_matches_independent_quadrature(self):
        spec = DensitySpec(6.0, 0.0, 0.0)
        assert spec.normalizer == pytest.approx(Z_KAPPA6, abs=1e-8)
        xs = np.linspace(-200.0, 200.0, 400001)
        with np.errstate(over="ignore"):
            vals = np.cosh(xs / 2.0) ** (-2.0 / 3.0)
        trapz = np.trapezoid(vals, xs)
        assert abs(spec.normalizer - trapz) < 1e-6

    def test_kappa2_normalizer_is_four(self):
        # cosh(x/2)^-2 integrates to 4 exactly
        assert DensitySpec(2.0, -2.0, -2.0).normalizer == pytest.approx(4.0, abs=1e-9)

    def test_sum_constraint(self):
        with pytest.raises(ValueError, match="kappa - 6"):
            DensitySpec(6.0, 1.0, 0.0)

    def test_normalizability_constraint(self):
        with pytest.raises(ValueError, match="normalizable"):
            DensitySpec(6.0, 1.5, -1.5)


class TestEndpointLaw:
    def test_symmetry_at_sigma_zero(self):
        law = theoretical_endpoint_density(DensitySpec(6.0, 0.0, 0.0))
        assert law.pdf(1.0) == pytest.approx(law.pdf(-1.0))

    def test_integrates_to_one(self):
        law = theoretical_endpoint_density(DensitySpec(6.0, 0.0, 0.0))
        total = quad(law.pdf, -np.inf, np.inf)[0]
        assert abs(total - 1.0) < 1e-6

    def test_tilted_mean_is_positive(self):
        # sigma = 0.5 tilts the law to the right
        law = theoretical_endpoint_density(DensitySpec(6.0, -0.5, 0.5))
        mean = quad(lambda x: x * law.pdf(x), -np.inf, np.inf)[0]
        assert mean > 0

    def test_inverse_cdf_sampler(self):
        law = theoretical_endpoint_density(DensitySpec(6.0, 0.0, 0.0))
        rng = np.random.default_rng(3)
        s = law.sample(rng, 10_000)
        assert ks_statistic(s, law.cdf) < 0.03

    def test_cdf_quantile_round_trip(self):
        law = theoretical_endpoint_density(DensitySpec(2.0, -2.0, -2.0))
        for q in (0.1, 0.5, 0.9):
            assert law.cdf(law.quantile(q)) == pytest.approx(q, abs=1e-6)


class TestScaleFunction:
    def test_two_sided_symmetric_split(self):
        assert right_escape_probability(6.0, -1.0, -1.0, 0.0) == pytest.approx(0.5, abs=1e-9)

    def test_one_sided_cases_unbounded(self):
        _, l1, l2 = limit_scale_function(6.0, 1.0, -1.0)
        assert l1 == -math.inf and math.isfinite(l2)
        _, l1, l2 = limit_scale_function(6.0, 1.0, 1.0)
        assert l1 == -math.inf and l2 == math.inf
        with pytest.raises(ValueError):
            right_escape_probability(6.0, 1.0, -1.0, 0.0)

    def test_split_monotone_in_start(self):
        # moving p0 to the right makes a right-side limit less likely
        ps = [right_escape_probability(6.0, -1.0, -1.0, x0) for x0 in (-2.0, 0.0, 2.0)]
        assert ps[0] > ps[1] > ps[2]


class TestKsStatistic:
    def test_identical_samples_give_zero(self):
        a = np.linspace(0, 1, 100)
        assert ks_statistic(a, a.copy()) == 0.0

    def test_disjoint_supports_give_one(self):
        assert ks_statistic(np.linspace(0, 1, 50), np.linspace(5, 6, 60)) == 1.0

    def test_uniform_against_cdf(self):
        rng = np.random.default_rng(12)
        u = rng.random(10_000)
        assert ks_statistic(u, lambda x: np.clip(x, 0, 1)) < 0.03

    def test_matches_scipy(self):
        scipy_stats = pytest.importorskip("scipy.stats")
        rng = np.random.default_rng(4)
        a, b = rng.standard_normal(300), rng.standard_normal(400) + 0.1
        assert ks_statistic(a, b) == pytest.approx(scipy_stats.ks_2samp(a, b).statistic)
        assert ks_statistic(a, scipy_stats.norm.cdf) == pytest.approx(
            scipy_stats.kstest(a, "norm").statistic
        )

    def test_small_samples_rejected(self):
        with pytest.raises(ValueError):
            ks_statistic(np.arange(5), np.arange(40))
        with pytest.raises(ValueError):
            ks_statistic(np.array([]), np.arange(40))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(30, 200), st.integers(0, 2**31 - 1))
    def test_statistic_in_unit_interval(self, n, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal(n)
        b = rng.standard_normal(n + 7)
        d = ks_statistic(a, b)
        assert 0.0 <= d <= 1.0
        assert d == pytest.approx(ks_statistic(b, a))

    def test_thresholds(self):
        assert ks_threshold_one_sample(2000) == pytest.approx(1.63 / math.sqrt(2000))
        assert ks_threshold_two_sample(2000, 2000) == pytest.approx(1.63 * math.sqrt(2 / 2000))
