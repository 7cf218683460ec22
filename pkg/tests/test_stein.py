"""Stein-kernel matrix and discrepancy-statistic tests."""

import numpy as np
import pytest

import ksdagg._fast
from ksdagg.exceptions import ConfigError, ModelEvaluationError
from ksdagg.kernels import KernelSpec, pairwise_sq_dists
from ksdagg.models import standard_normal_model
from ksdagg.stein import (
    kernel_partials,
    ksd_ustat,
    stein_gram,
    stein_gram_collection,
    stein_kernel_entry,
    stein_pair_values,
    stein_ustats,
)
from oracles import fd_stein_entry, naive_ksd_ustat

IMQ_UNIT = KernelSpec("imq", 1.0, 0.5)


class TestSteinKernelEntry:
    def test_standard_normal_origin(self):
        # s(0) = 0 kills three terms; the mixed trace at u = 0 is 2*beta*d/lam^2 = 1
        assert stein_kernel_entry([0.0], [0.0], [0.0], [0.0], IMQ_UNIT) == 1.0

    def test_standard_normal_one_zero(self):
        # hand derivation: h = -3 * 2^(-5/2)
        value = stein_kernel_entry([1.0], [0.0], [-1.0], [0.0], IMQ_UNIT)
        assert value == pytest.approx(-3.0 / 2**2.5, rel=1e-14)

    def test_against_finite_difference_oracle(self):
        rng = np.random.default_rng(10)
        for _ in range(25):
            d = int(rng.integers(1, 4))
            x, y = rng.standard_normal(d), rng.standard_normal(d)
            sx, sy = rng.standard_normal(d), rng.standard_normal(d)
            lam = float(rng.uniform(0.5, 3.0))
            family = rng.choice(["imq", "gaussian"])
            beta = float(rng.uniform(0.2, 0.9))
            spec = KernelSpec(family, lam, beta)
            expected = fd_stein_entry(x, y, sx, sy, lam, family, beta)
            assert stein_kernel_entry(x, y, sx, sy, spec) == pytest.approx(expected, rel=1e-7, abs=1e-9)

    def test_symmetry_under_argument_swap(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            d = int(rng.integers(1, 5))
            x, y = rng.standard_normal(d), rng.standard_normal(d)
            sx, sy = rng.standard_normal(d), rng.standard_normal(d)
            spec = KernelSpec(rng.choice(["imq", "gaussian"]), float(rng.uniform(0.3, 4.0)), 0.5)
            a = stein_kernel_entry(x, y, sx, sy, spec)
            b = stein_kernel_entry(y, x, sy, sx, spec)
            assert a == pytest.approx(b, rel=1e-12, abs=1e-15)


class TestKernelPartials:
    def test_assembly_matches_entry(self):
        # the fused Stein form must agree with the documented partials
        rng = np.random.default_rng(12)
        for _ in range(50):
            d = int(rng.integers(1, 4))
            x, y = rng.standard_normal(d), rng.standard_normal(d)
            sx, sy = rng.standard_normal(d), rng.standard_normal(d)
            spec = KernelSpec(rng.choice(["imq", "gaussian"]), float(rng.uniform(0.4, 3.0)), float(rng.uniform(0.2, 0.9)))
            grad_x, grad_y, trace = kernel_partials(x, y, spec)
            diff = x - y
            from ksdagg.kernels import kernel_value

            k = kernel_value(float(diff @ diff), spec)
            four_terms = float(sx @ sy) * k + float(sy @ grad_x) + float(sx @ grad_y) + trace
            assert stein_kernel_entry(x, y, sx, sy, spec) == pytest.approx(four_terms, rel=1e-12, abs=1e-15)

    def test_grad_y_is_negated_grad_x(self):
        grad_x, grad_y, _ = kernel_partials([1.0, 2.0], [0.5, -1.0], KernelSpec("gaussian", 1.5))
        np.testing.assert_array_equal(grad_y, -grad_x)


class TestSteinGram:
    def test_single_point(self):
        model = standard_normal_model(1)
        H = stein_gram(np.array([[2.0]]), model, IMQ_UNIT)
        assert H.shape == (1, 1)
        assert H[0, 0] == stein_kernel_entry([2.0], [2.0], [-2.0], [-2.0], IMQ_UNIT)

    def test_matches_entrywise_loop(self):
        model = standard_normal_model(1)
        X = np.array([[0.0], [1.0], [-1.0]])
        H = stein_gram(X, model, IMQ_UNIT)
        S = model.score(X)
        for i in range(3):
            for j in range(3):
                expected = stein_kernel_entry(X[i], X[j], S[i], S[j], IMQ_UNIT)
                assert H[i, j] == pytest.approx(expected, rel=1e-12, abs=1e-15)

    def test_diagonal_closed_form(self):
        # for the standard normal in 1-D at lam=1, beta=1/2: h(x, x) = x^2 + 1
        model = standard_normal_model(1)
        X = np.array([[0.0], [0.7], [-2.2], [3.0]])
        H = stein_gram(X, model, IMQ_UNIT)
        np.testing.assert_allclose(np.diag(H), X.ravel() ** 2 + 1.0, rtol=1e-14)

    def test_exactly_symmetric(self):
        rng = np.random.default_rng(13)
        model = standard_normal_model(3)
        X = rng.standard_normal((40, 3))
        for spec in [IMQ_UNIT, KernelSpec("gaussian", 0.8)]:
            H = stein_gram(X, model, spec)
            assert np.array_equal(H, H.T)

    def test_collection_shares_distances(self):
        rng = np.random.default_rng(14)
        model = standard_normal_model(2)
        X = rng.standard_normal((12, 2))
        specs = [KernelSpec("imq", lam, 0.5) for lam in (0.5, 1.0, 2.0)]
        grams = stein_gram_collection(X, model, specs, sq_dists=pairwise_sq_dists(X))
        for spec, H in zip(specs, grams):
            np.testing.assert_allclose(H, stein_gram(X, model, spec), rtol=1e-13, atol=1e-15)

    def test_non_finite_score_names_row(self):
        class BadModel:
            dim = 1

            def score(self, X):
                S = -np.asarray(X)
                S[2] = np.nan
                return S

        with pytest.raises(ModelEvaluationError, match="row 2"):
            stein_gram(np.arange(5.0).reshape(-1, 1), BadModel(), IMQ_UNIT)


class TestKsdUstat:
    def test_two_points(self):
        model = standard_normal_model(1)
        H = stein_gram(np.array([[0.0], [1.0]]), model, IMQ_UNIT)
        assert ksd_ustat(H) == pytest.approx(-3.0 / 2**2.5, rel=1e-14)

    def test_identical_points_give_diagonal_value(self):
        model = standard_normal_model(1)
        X = np.full((6, 1), 1.3)
        H = stein_gram(X, model, IMQ_UNIT)
        assert ksd_ustat(H) == pytest.approx(stein_kernel_entry([1.3], [1.3], [-1.3], [-1.3], IMQ_UNIT), rel=1e-12)

    def test_matches_naive_double_loop(self):
        rng = np.random.default_rng(15)
        for _ in range(30):
            n = int(rng.integers(2, 9))
            H = rng.standard_normal((n, n))
            H = H + H.T
            assert ksd_ustat(H) == pytest.approx(naive_ksd_ustat(H), rel=1e-12, abs=1e-15)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(16)
        H = rng.standard_normal((9, 9))
        H = H + H.T
        perm = rng.permutation(9)
        assert ksd_ustat(H[np.ix_(perm, perm)]) == pytest.approx(ksd_ustat(H), rel=1e-12)

    def test_scaling_by_power_of_two_is_exact(self):
        rng = np.random.default_rng(17)
        model = standard_normal_model(2)
        X = rng.standard_normal((10, 2))
        base = stein_gram(X, model, IMQ_UNIT)
        for c in (0.5, 4.0):
            scaled_spec = KernelSpec("imq", 1.0, 0.5, scale=c)
            H = stein_gram(X, model, scaled_spec)
            np.testing.assert_array_equal(H, c * base)
            assert ksd_ustat(H) == c * ksd_ustat(base)

    def test_scaling_by_arbitrary_constant(self):
        rng = np.random.default_rng(18)
        model = standard_normal_model(1)
        X = rng.standard_normal((8, 1))
        base = stein_gram(X, model, IMQ_UNIT)
        H = stein_gram(X, model, KernelSpec("imq", 1.0, 0.5, scale=3.7))
        np.testing.assert_array_equal(H, 3.7 * base)  # entrywise one multiply; exact
        assert ksd_ustat(H) == pytest.approx(3.7 * ksd_ustat(base), rel=1e-14)

    def test_too_few_samples(self):
        with pytest.raises(ConfigError):
            ksd_ustat(np.array([[1.0]]))


class TestSteinUstats:
    def test_matches_gram_path(self):
        rng = np.random.default_rng(19)
        model = standard_normal_model(2)
        X = rng.standard_normal((30, 2))
        specs = [KernelSpec("imq", 0.7, 0.5), KernelSpec("imq", 2.0, 0.3), KernelSpec("gaussian", 1.1)]
        fast = stein_ustats(X, model, specs)
        grams = stein_gram_collection(X, model, specs)
        expected = np.array([ksd_ustat(H) for H in grams])
        np.testing.assert_allclose(fast, expected, rtol=1e-12, atol=1e-15)

    def test_numpy_fallback_matches_jit(self):
        rng = np.random.default_rng(20)
        model = standard_normal_model(3)
        X = rng.standard_normal((25, 3))
        specs = [KernelSpec("imq", lam, 0.5) for lam in (0.25, 1.0, 4.0)]
        with_jit = stein_ustats(X, model, specs)
        had = ksdagg._fast.HAVE_NUMBA
        ksdagg._fast.HAVE_NUMBA = False
        try:
            without_jit = stein_ustats(X, model, specs)
        finally:
            ksdagg._fast.HAVE_NUMBA = had
        np.testing.assert_allclose(with_jit, without_jit, rtol=1e-12, atol=1e-15)


class TestPairValues:
    def test_matches_entry_loop(self):
        rng = np.random.default_rng(21)
        model = standard_normal_model(2)
        X = rng.standard_normal((7, 2))
        Y = rng.standard_normal((7, 2))
        values = stein_pair_values(X, Y, model, IMQ_UNIT)
        S_x, S_y = model.score(X), model.score(Y)
        for i in range(7):
            expected = stein_kernel_entry(X[i], Y[i], S_x[i], S_y[i], IMQ_UNIT)
            assert values[i] == pytest.approx(expected, rel=1e-12)

    def test_stein_identity_monte_carlo_smoke(self):
        # small-sample version of the acceptance criterion
        rng = np.random.default_rng(22)
        model = standard_normal_model(1)
        X = model.sample(200_000, rng)
        Y = model.sample(200_000, rng)
        values = stein_pair_values(X, Y, model, IMQ_UNIT)
        se = values.std(ddof=1) / np.sqrt(values.size)
        assert abs(values.mean()) <= 4.0 * se
