"""Comparison value functions against hand values and brute-force oracles."""

import math

import numpy as np
import pytest
from scipy import stats

from bvm.comparison import (
    BinnedPdf,
    area_metric,
    binned_prob_diff,
    coverage_fraction,
    divergence,
    ecdf,
    fraction_within,
    get_comparison_fn,
    hellinger,
    js_divergence,
    kl_divergence,
    max_abs_error,
    mean_abs_error,
)


class TestPathErrors:
    def test_mean_abs_error_hand_values(self):
        assert mean_abs_error([1.0, 2.0], [1.0, 2.0]) == 0.0
        assert mean_abs_error([0.0, 0.0], [1.0, 3.0]) == 2.0

    def test_translation(self):
        y = np.linspace(-2, 5, 17)
        assert mean_abs_error(y + 0.7, y) == pytest.approx(0.7)
        assert max_abs_error(y - 1.3, y) == pytest.approx(1.3)

    def test_max_abs_error_hand_values(self):
        assert max_abs_error([3.0], [3.0]) == 0.0
        assert max_abs_error([0.0, 7.0], [0.0, 0.0]) == 7.0
        assert max_abs_error([1.0, -1.0], [0.0, 0.0]) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mean_abs_error([1.0], [1.0, 2.0])

    def test_mean_never_exceeds_max(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            a, b = rng.normal(size=(2, 13))
            assert mean_abs_error(a, b) <= max_abs_error(a, b) + 1e-15

    def test_fraction_within_hand_values(self):
        y = np.zeros(50)
        yhat = np.zeros(50)
        assert fraction_within(yhat, y, 0.0) == 1.0
        yhat2 = yhat.copy()
        yhat2[7] = 0.2  # one point at 2 eps
        assert fraction_within(yhat2, y, 0.1) == pytest.approx(0.98)
        assert fraction_within(np.full(5, 0.2), np.zeros(5), 0.1) == 0.0

    def test_fraction_within_monotone_in_eps(self):
        rng = np.random.default_rng(1)
        a, b = rng.normal(size=(2, 40))
        fracs = [fraction_within(a, b, e) for e in np.linspace(0, 3, 31)]
        assert all(f2 >= f1 for f1, f2 in zip(fracs, fracs[1:]))

    def test_coverage_fraction(self):
        y = np.array([0.0, 1.0, 2.0, 3.0])
        wide = (y - 1.0, y + 1.0)
        assert coverage_fraction(y, wide) == 1.0
        half = (np.array([-0.5, 0.5, 2.5, 3.5]), np.array([0.5, 1.5, 2.2, 4.0]))
        assert coverage_fraction(y, half) == 0.5
        zero_width = (y + 0.01, y + 0.01)
        assert coverage_fraction(y, zero_width) == 0.0


class TestEcdf:
    def test_single_sample_step(self):
        f = ecdf([3.0])
        assert f(2.999) == 0.0
        assert f(3.0) == 1.0

    def test_order_statistics(self):
        f = ecdf([1, 2, 2, 4])
        assert f(2.0) == 0.75
        assert f(0.0) == 0.0
        assert f(100.0) == 1.0

    def test_limits(self):
        f = ecdf(np.random.default_rng(2).normal(size=50))
        assert f(-np.inf) == 0.0
        assert f(np.inf) == 1.0


class TestAreaMetric:
    def test_identical_is_zero(self):
        x = np.random.default_rng(3).normal(size=30)
        assert area_metric(ecdf(x), ecdf(x)) == 0.0

    def test_unit_translation_of_point_mass(self):
        assert area_metric(ecdf([0.0]), ecdf([1.0])) == 1.0

    def test_sorted_difference_identity_equal_sizes(self):
        # 1-d transport oracle: for equal sample counts the area equals
        # the mean absolute difference of the sorted samples.
        rng = np.random.default_rng(4)
        for _ in range(100):
            a = rng.normal(size=10)
            b = rng.normal(1.0, 2.0, size=10)
            oracle = np.mean(np.abs(np.sort(a) - np.sort(b)))
            assert area_metric(ecdf(a), ecdf(b)) == pytest.approx(oracle, rel=1e-12)

    def test_matches_scipy_transport_distance(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            a = rng.normal(size=rng.integers(2, 20))
            b = rng.normal(size=rng.integers(2, 20))
            assert area_metric(ecdf(a), ecdf(b)) == pytest.approx(
                stats.wasserstein_distance(a, b), rel=1e-10
            )

    def test_symmetry(self):
        rng = np.random.default_rng(6)
        a, b = rng.normal(size=(2, 9))
        assert area_metric(ecdf(a), ecdf(b)) == area_metric(ecdf(b), ecdf(a))


class TestBinnedPdf:
    def test_mass_validation(self):
        with pytest.raises(ValueError):
            BinnedPdf([0, 1, 2], [0.6, 0.5])
        with pytest.raises(ValueError):
            BinnedPdf([0, 1], [1.0, 0.0])

    def test_from_samples(self):
        pdf = BinnedPdf.from_samples(np.random.default_rng(7).normal(size=5000), 32)
        assert pdf.masses.sum() == pytest.approx(1.0, abs=1e-12)
        assert pdf.masses.size == 32

    def test_binned_prob_diff_hand_values(self):
        p = BinnedPdf([0, 1, 2], [0.5, 0.5])
        q = BinnedPdf([0, 1, 2], [0.25, 0.75])
        assert binned_prob_diff(p, p) == 0.0
        assert binned_prob_diff(p, q) == pytest.approx(0.5)

    def test_disjoint_supports_double(self):
        p = BinnedPdf([0, 1, 2], [1.0, 0.0])
        q = BinnedPdf([0, 1, 2], [0.0, 1.0])
        assert binned_prob_diff(p, q) == 2.0

    def test_edge_mismatch(self):
        with pytest.raises(ValueError):
            binned_prob_diff(BinnedPdf([0, 1, 2], [0.5, 0.5]), BinnedPdf([0, 1, 3], [0.5, 0.5]))


class TestDivergences:
    def test_zero_on_equal(self):
        p = np.array([0.2, 0.3, 0.5])
        for kind in ("kl", "sym_kl", "js", "hellinger"):
            assert divergence(kind, p, p) == 0.0

    def test_kl_hand_value(self):
        # 0.5 ln 2 + 0.5 ln(2/3), evaluated by hand.
        expected = 0.5 * math.log(2.0) + 0.5 * math.log(2.0 / 3.0)
        assert kl_divergence([0.5, 0.5], [0.25, 0.75]) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(0.14384, abs=1e-5)

    def test_kl_zero_times_log_zero(self):
        assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2.0))

    def test_kl_infinite_on_missing_support(self):
        assert kl_divergence([0.5, 0.5], [1.0, 0.0]) == math.inf

    def test_js_bounded_by_ln2(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            p = rng.dirichlet(np.ones(6))
            q = rng.dirichlet(np.ones(6))
            assert 0.0 <= js_divergence(p, q) <= math.log(2.0) + 1e-12
        assert js_divergence([1.0, 0.0], [0.0, 1.0]) == pytest.approx(math.log(2.0))

    def test_hellinger_convention(self):
        # H^2 = 1 - sum sqrt(p q); check against direct evaluation.
        p = np.array([0.1, 0.9])
        q = np.array([0.6, 0.4])
        expected = math.sqrt(1.0 - (math.sqrt(0.06) + math.sqrt(0.36)))
        assert hellinger(p, q) == pytest.approx(expected, rel=1e-12)
        assert hellinger([1.0, 0.0], [0.0, 1.0]) == 1.0

    def test_nonnegative_and_symmetric_fns(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            p = rng.dirichlet(np.ones(5))
            q = rng.dirichlet(np.ones(5))
            for kind in ("sym_kl", "js", "hellinger"):
                a, b = divergence(kind, p, q), divergence(kind, q, p)
                assert a >= 0.0
                assert a == pytest.approx(b, rel=1e-10)


class TestRegistry:
    def test_batch_matches_pairwise(self):
        rng = np.random.default_rng(10)
        zh = rng.normal(size=(20, 7))
        z = rng.normal(size=(20, 7))
        for name in ("mean_abs_error", "max_abs_error"):
            fn = get_comparison_fn(name)
            batch = fn.on_batch(zh, z)
            pairs = [fn.pair(a, b) for a, b in zip(zh, z)]
            assert np.allclose(batch, pairs, atol=0)

    def test_symmetric_flags_hold(self):
        rng = np.random.default_rng(11)
        a, b = rng.normal(size=(2, 6))
        for name in ("abs_diff", "sq_diff", "mean_abs_error", "max_abs_error", "area_metric"):
            fn = get_comparison_fn(name)
            assert fn.symmetric
            assert np.allclose(np.asarray(fn.pair(a, b)), np.asarray(fn.pair(b, a)))

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            get_comparison_fn("nope")

    def test_binned_prob_diff_fn_on_paths(self):
        fn = get_comparison_fn("binned_prob_diff", bins=8)
        rng = np.random.default_rng(12)
        a = rng.normal(size=200)
        assert fn.pair(a, a) == 0.0
        b = rng.normal(3.0, 1.0, size=200)
        assert 0.0 < fn.pair(a, b) <= 2.0
