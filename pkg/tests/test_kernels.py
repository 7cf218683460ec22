"""Kernel, distance, and bandwidth-collection tests."""

import numpy as np
import pytest

from ksdagg.exceptions import ConfigError, DataError, DegenerateDataError
from ksdagg.kernels import (
    BandwidthCollection,
    KernelSpec,
    collection_from_bandwidths,
    geometric_collection,
    kernel_value,
    median_bandwidth,
    pairwise_sq_dists,
    power_of_two_collection,
)


def naive_sq_dists(X):
    n = len(X)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            D[i, j] = sum((X[i, t] - X[j, t]) ** 2 for t in range(X.shape[1]))
    return D


class TestPairwiseSqDists:
    def test_two_points_1d(self):
        D = pairwise_sq_dists(np.array([[0.0], [3.0]]))
        np.testing.assert_array_equal(D, [[0.0, 9.0], [9.0, 0.0]])

    def test_single_point(self):
        np.testing.assert_array_equal(pairwise_sq_dists(np.array([[5.0]])), [[0.0]])

    def test_three_points_2d(self):
        D = pairwise_sq_dists(np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 2.0]]))
        assert D[0, 1] == 2.0 and D[1, 2] == 2.0 and D[0, 2] == 4.0

    def test_matches_naive_loop(self):
        rng = np.random.default_rng(0)
        for n, d in [(2, 1), (7, 3), (20, 5)]:
            X = rng.standard_normal((n, d)) * 3
            D = pairwise_sq_dists(X)
            np.testing.assert_allclose(D, naive_sq_dists(X), rtol=1e-12, atol=1e-12)

    def test_symmetric_zero_diag_nonnegative(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((15, 4))
        D = pairwise_sq_dists(X)
        np.testing.assert_array_equal(D, D.T)
        np.testing.assert_array_equal(np.diag(D), np.zeros(15))
        assert np.all(D >= 0)

    def test_rejects_non_finite(self):
        with pytest.raises(DataError):
            pairwise_sq_dists(np.array([[0.0], [np.nan]]))


class TestKernelValue:
    def test_zero_distance_is_one(self):
        for spec in [KernelSpec("imq", 0.7, 0.3), KernelSpec("gaussian", 2.5)]:
            assert kernel_value(0.0, spec) == 1.0

    def test_imq_closed_form(self):
        assert kernel_value(3.0, KernelSpec("imq", 1.0, 0.5)) == pytest.approx(0.5, rel=1e-15)

    def test_gaussian_closed_form(self):
        assert kernel_value(4.0, KernelSpec("gaussian", 2.0)) == pytest.approx(np.exp(-1.0), rel=1e-15)

    def test_monotone_nonincreasing(self):
        u = np.linspace(0.0, 50.0, 400)
        for spec in [KernelSpec("imq", 1.3, 0.5), KernelSpec("imq", 0.4, 0.8), KernelSpec("gaussian", 1.7)]:
            values = kernel_value(u, spec)
            assert np.all(np.diff(values) <= 0)
            assert np.all((values > 0) & (values <= 1))

    def test_invalid_spec(self):
        with pytest.raises(ConfigError):
            KernelSpec("imq", -1.0)
        with pytest.raises(ConfigError):
            KernelSpec("imq", 1.0, 1.5)
        with pytest.raises(ConfigError):
            KernelSpec("cubic", 1.0)


class TestMedianBandwidth:
    def test_three_points(self):
        assert median_bandwidth(np.array([[0.0], [3.0], [4.0]])) == 3.0

    def test_single_pair(self):
        assert median_bandwidth(np.array([[0.0], [1.0]])) == 1.0

    def test_even_count_mean_convention(self):
        # distances {1, 2, 10, 1, 9, 8}; sorted middle two are 2 and 8
        assert median_bandwidth(np.array([[0.0], [1.0], [2.0], [10.0]])) == 5.0

    def test_matches_brute_force(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            X = rng.standard_normal((rng.integers(2, 12), rng.integers(1, 4)))
            dists = [np.linalg.norm(X[i] - X[j]) for i in range(len(X)) for j in range(i + 1, len(X))]
            np.testing.assert_allclose(median_bandwidth(X), np.median(dists), rtol=1e-12)

    def test_permutation_and_translation_invariance(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((11, 3))
        lam = median_bandwidth(X)
        perm = rng.permutation(11)
        np.testing.assert_allclose(median_bandwidth(X[perm]), lam, rtol=1e-12)
        np.testing.assert_allclose(median_bandwidth(X + np.array([5.0, -2.0, 0.5])), lam, rtol=1e-9)

    def test_degenerate_data(self):
        with pytest.raises(DegenerateDataError):
            median_bandwidth(np.zeros((4, 2)))


class TestPowerOfTwoCollection:
    def test_basic_enumeration(self):
        coll = power_of_two_collection(1.0, 0, 2)
        assert coll.bandwidths == (1.0, 2.0, 4.0)
        np.testing.assert_allclose(coll.weights, [1 / 3] * 3)

    def test_large_negative_range(self):
        coll = power_of_two_collection(2437.0, -20, 0)
        assert len(coll) == 21
        assert coll.bandwidths[0] == pytest.approx(2437.0 / 2**20, rel=1e-12)
        assert coll.bandwidths[0] == pytest.approx(0.002324, rel=1e-3)
        assert coll.bandwidths[-1] == 2437.0

    def test_two_element(self):
        coll = power_of_two_collection(1.0, -1, 0)
        assert coll.bandwidths == (0.5, 1.0)
        assert coll.weights == (0.5, 0.5)

    def test_strictly_increasing_weights_sum_one(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            lam = float(rng.uniform(0.01, 100.0))
            lo = int(rng.integers(-25, 5))
            hi = lo + int(rng.integers(1, 25))
            coll = power_of_two_collection(lam, lo, hi)
            assert np.all(np.diff(coll.bandwidths) > 0)
            assert abs(sum(coll.weights) - 1.0) < 1e-12

    def test_bad_range(self):
        with pytest.raises(ConfigError):
            power_of_two_collection(1.0, 3, 3)


class TestGeometricCollection:
    def test_plug_in(self):
        # max pairwise distance 3 in 2-D: ladder {0.5, 0.5*sqrt(3), 1.5}
        X = np.array([[0.0, 0.0], [3.0, 0.0]])
        coll = geometric_collection(X, 3)
        np.testing.assert_allclose(coll.bandwidths, [0.5, 0.5 * np.sqrt(3.0), 1.5], rtol=1e-12)

    def test_span_floor_at_two(self):
        X = np.array([[0.0], [1.0]])
        coll = geometric_collection(X, 2)
        np.testing.assert_allclose(coll.bandwidths, [1.0, 2.0], rtol=1e-12)

    def test_default_size_ten(self):
        rng = np.random.default_rng(5)
        coll = geometric_collection(rng.standard_normal((30, 4)))
        assert len(coll) == 10
        np.testing.assert_allclose(coll.weights, [0.1] * 10)

    def test_endpoints_and_geometric_spacing(self):
        rng = np.random.default_rng(6)
        X = rng.standard_normal((25, 3)) * 4
        coll = geometric_collection(X, 7)
        d = X.shape[1]
        lam_max = max(2.0, np.sqrt(pairwise_sq_dists(X).max()))
        assert coll.bandwidths[0] == pytest.approx(1.0 / d, rel=1e-12)
        assert coll.bandwidths[-1] == pytest.approx(lam_max / d, rel=1e-12)
        ratios = np.diff(np.log(coll.bandwidths))
        np.testing.assert_allclose(ratios, ratios[0], rtol=1e-12)

    def test_too_few_points(self):
        with pytest.raises(DataError):
            geometric_collection(np.array([[1.0]]), 5)


class TestBandwidthCollection:
    def test_weight_sum_validation(self):
        with pytest.raises(ConfigError):
            BandwidthCollection((1.0, 2.0), (0.7, 0.7))
        with pytest.raises(ConfigError):
            BandwidthCollection((1.0,), (-0.1,))
        with pytest.raises(ConfigError):
            BandwidthCollection((), ())

    def test_explicit_wrapper_defaults_uniform(self):
        coll = collection_from_bandwidths([2.0, 4.0, 8.0, 16.0])
        np.testing.assert_allclose(coll.weights, [0.25] * 4)
