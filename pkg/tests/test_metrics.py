import math

import numpy as np
import pytest

from vasrp.distributions import BetaParams, GaussianParams, UniformBase
from vasrp.errors import ZeroVarianceError
from vasrp.metrics import (
    Histogram,
    compare,
    histogramize,
    linreg,
    model_histogram,
    pearson,
    pearson_pvalue,
    spearman,
)


class TestHistogramize:
    def test_edge_values_land_in_outer_bins(self):
        h = histogramize([0.01, 0.99], 0.05)
        assert h.counts[0] == 1
        assert h.counts[-1] == 1
        assert h.counts[1:-1].sum() == 0

    def test_one_value_per_bin_gives_flat_density(self):
        values = np.arange(20) / 20 + 0.025
        h = histogramize(values, 0.05)
        assert np.all(h.counts == 1)
        assert np.allclose(h.density, 1.0)

    def test_empty_input_flags_density_undefined(self):
        h = histogramize([], 0.05)
        assert np.all(h.counts == 0)
        assert h.probs is None
        assert h.density is None

    def test_right_open_binning(self):
        h = histogramize([0.05, 0.1 - 1e-12], 0.05)
        assert h.counts[1] == 2

    def test_invalid_bin_width(self):
        with pytest.raises(ValueError):
            histogramize([0.5], 0.07)

    def test_bin_count(self):
        assert histogramize([0.5], 0.05).n_bins == 20


class TestCompare:
    def test_identity_fixed_point(self):
        h = histogramize(np.linspace(0.02, 0.98, 111), 0.05)
        m = compare(h, h)
        assert m.corr == pytest.approx(1.0)
        assert m.d_kl == pytest.approx(0.0, abs=1e-12)
        assert m.chisq == 0.0
        assert m.intersect == pytest.approx(1.0)
        assert m.bhattacharyya == pytest.approx(0.0, abs=1e-6)

    def test_flat_identity_uses_degenerate_convention(self):
        h = histogramize(np.arange(20) / 20 + 0.025, 0.05)
        assert compare(h, h).corr == 1.0

    def test_disjoint_support(self):
        a = Histogram(0.5, None, np.array([1.0, 0.0]))
        b = Histogram(0.5, None, np.array([0.0, 1.0]))
        m = compare(a, b)
        assert m.intersect == 0.0
        assert m.bhattacharyya == pytest.approx(1.0)

    def test_kl_hand_value(self):
        a = Histogram(0.5, None, np.array([0.5, 0.5]))
        b = Histogram(0.5, None, np.array([0.25, 0.75]))
        expected = 0.5 * math.log(2) + 0.5 * math.log(2 / 3)
        assert compare(a, b).d_kl == pytest.approx(expected, abs=1e-6)

    def test_directional_measures_take_first_as_empirical(self):
        a = Histogram(0.5, None, np.array([0.5, 0.5]))
        b = Histogram(0.5, None, np.array([0.25, 0.75]))
        assert compare(a, b).d_kl != pytest.approx(compare(b, a).d_kl, abs=1e-3)

    def test_symmetric_measures(self):
        a = Histogram(0.25, None, np.array([0.4, 0.3, 0.2, 0.1]))
        b = Histogram(0.25, None, np.array([0.1, 0.2, 0.3, 0.4]))
        assert compare(a, b).intersect == pytest.approx(compare(b, a).intersect)
        assert compare(a, b).bhattacharyya == pytest.approx(compare(b, a).bhattacharyya)

    def test_count_scale_invariance(self):
        h1 = histogramize(np.repeat(np.linspace(0.1, 0.9, 9), 3), 0.1)
        h2 = histogramize(np.repeat(np.linspace(0.1, 0.9, 9), 30), 0.1)
        m1 = compare(h1, h2)
        m2 = compare(h2, h1)
        assert m1.intersect == pytest.approx(m2.intersect)
        assert m1.corr == pytest.approx(1.0)

    def test_bin_mismatch(self):
        with pytest.raises(ValueError):
            compare(histogramize([0.5], 0.05), histogramize([0.5], 0.1))

    def test_empty_histogram_rejected(self):
        with pytest.raises(ValueError):
            compare(histogramize([], 0.05), histogramize([0.5], 0.05))

    def test_bounds_hold_on_random_pairs(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            h1 = histogramize(rng.uniform(0.001, 0.999, 50), 0.05)
            h2 = histogramize(rng.uniform(0.001, 0.999, 50), 0.05)
            m = compare(h1, h2)
            assert -1.0 <= m.corr <= 1.0
            assert m.d_kl >= 0.0
            assert 0.0 <= m.intersect <= 1.0
            assert 0.0 <= m.bhattacharyya <= 1.0


class TestModelHistogram:
    def test_uniform_density_is_flat(self):
        h = model_histogram(UniformBase(0.0, 1.0), 0.05)
        assert np.allclose(h.probs, 0.05)

    def test_beta_mass_concentrates_at_mode(self):
        h = model_histogram(BetaParams(10, 10), 0.05)
        assert h.probs.argmax() in (9, 10)
        assert h.probs.sum() == pytest.approx(1.0)

    def test_gaussian_renormalized_to_unit_mass(self):
        h = model_histogram(GaussianParams(0.5, 0.4), 0.05)
        assert h.probs.sum() == pytest.approx(1.0)


class TestCorrelationUtilities:
    def test_pearson_exact_line(self):
        assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
        slope, intercept, r2 = linreg([1, 2, 3], [2, 4, 6])
        assert slope == pytest.approx(2.0)
        assert intercept == pytest.approx(0.0, abs=1e-12)
        assert r2 == pytest.approx(1.0)

    def test_spearman_reversed_ranks(self):
        assert spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_spearman_average_ranks_for_ties(self):
        rho = spearman([1, 2, 2, 3], [1, 2, 3, 4])
        assert -1.0 < rho < 1.0

    def test_zero_variance(self):
        with pytest.raises(ZeroVarianceError):
            pearson([1, 1, 1], [1, 2, 3])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            pearson([1, 2], [1, 2, 3])

    def test_too_short(self):
        with pytest.raises(ValueError):
            pearson([1, 2], [1, 2])

    def test_pearson_affine_invariance(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=30)
        y = rng.normal(size=30)
        assert pearson(x, y) == pytest.approx(pearson(3 * x - 2, 0.5 * y + 4))

    def test_pvalue_range_and_direction(self):
        assert pearson_pvalue(0.99, 100) < 1e-6
        assert pearson_pvalue(0.05, 10) > 0.5
