"""Estimator-style interface to the tests.

Thin wrappers following the scikit-learn conventions: constructor stores
parameters verbatim (so ``get_params``/``set_params``/``clone`` work),
``fit(X)`` runs the test against the configured score model and exposes
the outcome through trailing-underscore attributes.
"""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_data_matrix
from .aggregation import AggConfig, ksdagg_test
from .baselines import median_test, split_test
from .exceptions import ConfigError
from .kernels import (
    BandwidthCollection,
    collection_from_bandwidths,
    geometric_collection,
    median_bandwidth,
    power_of_two_collection,
)
from .rng import RngStream


def _stream_from_state(random_state) -> RngStream:
    if random_state is None:
        return RngStream(int(np.random.SeedSequence().entropy % (2**63)))
    if isinstance(random_state, RngStream):
        return random_state
    if isinstance(random_state, numbers.Integral):
        return RngStream(int(random_state))
    raise ConfigError(f"random_state must be None, an int, or an RngStream, got {random_state!r}")


def _resolve_collection(X, bandwidths, l_lo, l_hi, n_bandwidths) -> BandwidthCollection:
    if isinstance(bandwidths, BandwidthCollection):
        return bandwidths
    if isinstance(bandwidths, str):
        if bandwidths == "median_powers":
            return power_of_two_collection(median_bandwidth(X), l_lo, l_hi)
        if bandwidths == "geometric":
            return geometric_collection(X, n_bandwidths)
        raise ConfigError(f"unknown bandwidth rule {bandwidths!r}; use 'median_powers', 'geometric', or an array")
    return collection_from_bandwidths(bandwidths)


class KSDAgg(BaseEstimator):
    """Aggregated goodness-of-fit test over a bandwidth collection.

    Parameters
    ----------
    model : ScoreModel
        The model under test; must expose ``score`` (and ``sample`` when
        ``bootstrap="parametric"``).
    bandwidths : str or array-like
        ``"median_powers"`` scales powers of two around the median
        heuristic (using ``l_lo``/``l_hi``), ``"geometric"`` builds a
        dimension-normalised geometric ladder of ``n_bandwidths`` values,
        and an explicit array is used as-is with uniform weights.
    bootstrap : str
        ``"wild"`` (threshold from sign-flipped statistics; asymptotic
        level) or ``"parametric"`` (fresh model samples; exact level).

    Attributes
    ----------
    reject_ : bool
        Test decision: True when the data is judged incompatible with the
        model at level ``alpha``.
    u_alpha_ : float
        Fitted level-correction multiplier.
    report_ : TestReport
        Full per-kernel details.
    """

    def __init__(
        self,
        model=None,
        bandwidths="median_powers",
        l_lo=0,
        l_hi=10,
        n_bandwidths=10,
        kernel="imq",
        imq_beta=0.5,
        alpha=0.05,
        b1=500,
        b2=500,
        b3=50,
        bootstrap="wild",
        random_state=None,
    ):
        self.model = model
        self.bandwidths = bandwidths
        self.l_lo = l_lo
        self.l_hi = l_hi
        self.n_bandwidths = n_bandwidths
        self.kernel = kernel
        self.imq_beta = imq_beta
        self.alpha = alpha
        self.b1 = b1
        self.b2 = b2
        self.b3 = b3
        self.bootstrap = bootstrap
        self.random_state = random_state

    def fit(self, X, y=None):
        if self.model is None:
            raise ConfigError("a score model is required")
        X = check_data_matrix(X, min_rows=2)
        collection = _resolve_collection(X, self.bandwidths, self.l_lo, self.l_hi, self.n_bandwidths)
        config = AggConfig(
            collection=collection,
            alpha=self.alpha,
            b1=self.b1,
            b2=self.b2,
            b3=self.b3,
            bootstrap=self.bootstrap,
            family=self.kernel,
            imq_beta=self.imq_beta,
        )
        report = ksdagg_test(X, self.model, config, _stream_from_state(self.random_state))
        self.report_ = report
        self.reject_ = report.reject
        self.u_alpha_ = report.u_alpha
        self.bandwidths_ = np.array([k.bandwidth for k in report.kernels])
        self.statistics_ = np.array([k.statistic for k in report.kernels])
        self.thresholds_ = np.array([k.threshold for k in report.kernels])
        self.kernel_rejects_ = np.array([k.reject for k in report.kernels])
        return self


class MedianKSD(BaseEstimator):
    """Fixed-kernel test with the median-heuristic bandwidth."""

    def __init__(
        self,
        model=None,
        kernel="imq",
        imq_beta=0.5,
        alpha=0.05,
        b1=500,
        bootstrap="wild",
        random_state=None,
    ):
        self.model = model
        self.kernel = kernel
        self.imq_beta = imq_beta
        self.alpha = alpha
        self.b1 = b1
        self.bootstrap = bootstrap
        self.random_state = random_state

    def fit(self, X, y=None):
        if self.model is None:
            raise ConfigError("a score model is required")
        X = check_data_matrix(X, min_rows=2)
        report = median_test(
            X,
            self.model,
            self.alpha,
            self.b1,
            self.bootstrap,
            _stream_from_state(self.random_state),
            family=self.kernel,
            imq_beta=self.imq_beta,
        )
        self.report_ = report
        self.reject_ = report.reject
        self.bandwidth_ = report.kernels[0].bandwidth
        self.statistic_ = report.kernels[0].statistic
        self.threshold_ = report.kernels[0].threshold
        return self


class SplitKSD(BaseEstimator):
    """Data-splitting test: select a bandwidth by power proxy, test on the rest.

    ``fit(X)`` splits ``X`` in half; ``fit(X, extra=E)`` selects on ``E``
    and tests on all of ``X``.
    """

    def __init__(
        self,
        model=None,
        bandwidths="median_powers",
        l_lo=0,
        l_hi=10,
        n_bandwidths=10,
        kernel="imq",
        imq_beta=0.5,
        alpha=0.05,
        b1=500,
        bootstrap="wild",
        random_state=None,
    ):
        self.model = model
        self.bandwidths = bandwidths
        self.l_lo = l_lo
        self.l_hi = l_hi
        self.n_bandwidths = n_bandwidths
        self.kernel = kernel
        self.imq_beta = imq_beta
        self.alpha = alpha
        self.b1 = b1
        self.bootstrap = bootstrap
        self.random_state = random_state

    def fit(self, X, y=None, extra=None):
        if self.model is None:
            raise ConfigError("a score model is required")
        X = check_data_matrix(X, min_rows=2)
        collection = _resolve_collection(X, self.bandwidths, self.l_lo, self.l_hi, self.n_bandwidths)
        report = split_test(
            X,
            self.model,
            collection,
            self.alpha,
            self.b1,
            self.bootstrap,
            _stream_from_state(self.random_state),
            extra=extra,
            family=self.kernel,
            imq_beta=self.imq_beta,
        )
        self.report_ = report
        self.reject_ = report.reject
        self.selected_bandwidth_ = report.selected_bandwidth
        self.n_test_ = report.n_test
        return self
