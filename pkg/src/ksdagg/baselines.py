"""Comparison tests: median-heuristic, data-splitting, and split-with-extra-data.

The splitting tests pick the bandwidth maximising a proxy for asymptotic
power, the ratio of the discrepancy statistic to a regularised estimate of
its standard deviation under the alternative.
"""

from __future__ import annotations

import time
from dataclasses import replace

import numpy as np

from ._validation import check_data_matrix
from .aggregation import TestReport, single_test
from .exceptions import ConfigError
from .kernels import IMQ, BandwidthCollection, KernelSpec, median_bandwidth
from .rng import RngStream
from .stein import ksd_ustat, stein_gram_collection

# Floor for the variance estimate; keeps the proxy finite on degenerate Grams.
VARIANCE_FLOOR = 1e-8


def power_proxy(H: np.ndarray) -> float:
    """Statistic-to-deviation ratio used for bandwidth selection.

    The denominator is the first-order asymptotic variance of the
    U-statistic under the alternative, ``(4/N) var_i(r_i)`` for the
    conditional means ``r_i = mean_{j != i} H[i,j]``, floored at 1e-8.
    """
    H = np.asarray(H, dtype=np.float64)
    n = H.shape[0]
    if n < 2:
        raise ConfigError("power proxy needs at least 2 samples")
    r = (H.sum(axis=1) - np.diag(H)) / (n - 1)
    m1 = r.mean()
    m2 = (r**2).mean()
    var = max(VARIANCE_FLOOR, (4.0 / n) * (m2 - m1**2))
    return ksd_ustat(H) / np.sqrt(var)


def select_bandwidth_by_proxy(
    X_sel,
    model,
    collection: BandwidthCollection,
    family: str = IMQ,
    imq_beta: float = 0.5,
) -> KernelSpec:
    """The collection bandwidth with the largest power proxy on ``X_sel``.

    Ties break toward the smallest bandwidth.
    """
    specs = collection.specs(family, imq_beta)
    grams = stein_gram_collection(X_sel, model, specs)
    best = 0
    best_proxy = power_proxy(grams[0])
    for k in range(1, len(specs)):
        proxy = power_proxy(grams[k])
        if proxy > best_proxy:
            best, best_proxy = k, proxy
    return specs[best]


def median_test(
    X,
    model,
    alpha: float,
    b1: int,
    bootstrap: str,
    stream: RngStream,
    family: str = IMQ,
    imq_beta: float = 0.5,
) -> TestReport:
    """Single test with the bandwidth set to the median pairwise distance."""
    X = check_data_matrix(X, min_rows=2)
    spec = KernelSpec(family, median_bandwidth(X), imq_beta)
    return single_test(X, model, spec, alpha, b1, bootstrap, stream)


def split_test(
    X,
    model,
    collection: BandwidthCollection,
    alpha: float,
    b1: int,
    bootstrap: str,
    stream: RngStream,
    extra=None,
    family: str = IMQ,
    imq_beta: float = 0.5,
) -> TestReport:
    """Bandwidth selection by proxy, then a single test on held-out data.

    Without ``extra``, the first floor(N/2) rows select the bandwidth and
    the remaining rows are tested (the selection rows never enter the test
    Gram). With ``extra``, selection runs on the extra dataset and the
    test uses all of ``X``.
    """
    t0 = time.perf_counter()
    X = check_data_matrix(X, min_rows=2)
    if extra is None:
        n = X.shape[0]
        if n < 4:
            raise ConfigError(f"in-sample splitting needs at least 4 samples, got {n}")
        n_sel = n // 2
        X_sel, X_test = X[:n_sel], X[n_sel:]
    else:
        X_sel = check_data_matrix(extra, min_rows=2)
        X_test = X

    spec = select_bandwidth_by_proxy(X_sel, model, collection, family, imq_beta)
    report = single_test(X_test, model, spec, alpha, b1, bootstrap, stream)
    return replace(
        report,
        selected_bandwidth=spec.bandwidth,
        n_test=X_test.shape[0],
        elapsed_seconds=time.perf_counter() - t0,
    )
