"""Single and aggregated goodness-of-fit tests.

The single test rejects when the observed statistic strictly exceeds the
Monte Carlo (1 - alpha)-quantile of its simulated null statistics. The
aggregated test runs one single test per kernel at the adjusted level
``u_alpha * w_k``, where the correction ``u_alpha`` is the largest level
multiplier keeping the estimated joint type I error at or below alpha; it
is found by bisection over ``(0, min_k 1/w_k)``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_alpha, check_data_matrix, check_positive_int
from .bootstrap import (
    BootstrapBank,
    parametric_null_stats,
    quantile_index,
    rademacher_signs,
    wild_bootstrap_stats,
)
from .exceptions import ConfigError
from .kernels import IMQ, BandwidthCollection, KernelSpec
from .rng import RngStream
from .stein import ksd_ustat, stein_gram_collection, stein_ustats

WILD = "wild"
PARAMETRIC = "parametric"
BOOTSTRAP_KINDS = (WILD, PARAMETRIC)

_WILD_LEVEL_NOTE = "wild bootstrap: level control is asymptotic (Lipschitz Stein kernel assumed)"


@dataclass(frozen=True)
class AggConfig:
    """Parameters of the aggregated test."""

    collection: BandwidthCollection
    alpha: float = 0.05
    b1: int = 500
    b2: int = 500
    b3: int = 50
    bootstrap: str = WILD
    family: str = IMQ
    imq_beta: float = 0.5

    def __post_init__(self):
        check_alpha(self.alpha)
        for name in ("b1", "b2", "b3"):
            check_positive_int(getattr(self, name), name)
        if self.bootstrap not in BOOTSTRAP_KINDS:
            raise ConfigError(f"bootstrap must be one of {BOOTSTRAP_KINDS}, got {self.bootstrap!r}")

    def specs(self) -> list[KernelSpec]:
        return self.collection.specs(self.family, self.imq_beta)


@dataclass(frozen=True)
class KernelResult:
    """Per-kernel outcome of a test."""

    bandwidth: float
    weight: float
    statistic: float
    threshold: float
    reject: bool


@dataclass(frozen=True)
class TestReport:
    """Outcome of a single or aggregated test."""

    reject: bool
    kernels: tuple[KernelResult, ...]
    alpha: float
    bootstrap: str
    u_alpha: float | None = None
    seed: tuple | None = None
    n_test: int | None = None
    selected_bandwidth: float | None = None
    elapsed_seconds: float = 0.0
    notes: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.reject != any(k.reject for k in self.kernels):
            raise ConfigError("reject flag must equal the OR of the per-kernel flags")


def single_test(
    X,
    model,
    spec: KernelSpec,
    alpha: float,
    b1: int,
    bootstrap: str,
    stream: RngStream,
) -> TestReport:
    """Fixed-kernel test: reject when the statistic strictly exceeds the
    Monte Carlo (1 - alpha)-quantile of b1 simulated null statistics."""
    t0 = time.perf_counter()
    X = check_data_matrix(X, min_rows=2)
    alpha = check_alpha(alpha, strict_upper=False)
    check_positive_int(b1, "b1")
    n = X.shape[0]
    notes = []

    if bootstrap == WILD:
        [H] = stein_gram_collection(X, model, [spec])
        observed = ksd_ustat(H)
        sims = wild_bootstrap_stats(H, rademacher_signs(b1, n, stream.child("quantile").generator()))
        notes.append(_WILD_LEVEL_NOTE)
    elif bootstrap == PARAMETRIC:
        observed = float(stein_ustats(X, model, [spec])[0])
        sims = parametric_null_stats(model, [spec], n, b1, stream.child("quantile"))[:, 0]
    else:
        raise ConfigError(f"bootstrap must be one of {BOOTSTRAP_KINDS}, got {bootstrap!r}")

    bank = BootstrapBank.from_simulations(sims, observed)
    idx, _ = quantile_index(bank.sorted_null.size, alpha)
    threshold = float(bank.sorted_null[idx - 1])
    reject = observed > threshold
    result = KernelResult(spec.bandwidth, 1.0, observed, threshold, bool(reject))
    return TestReport(
        reject=bool(reject),
        kernels=(result,),
        alpha=alpha,
        bootstrap=bootstrap,
        seed=(stream.seed, stream.key),
        n_test=n,
        elapsed_seconds=time.perf_counter() - t0,
        notes=tuple(notes),
    )


def compute_u_alpha(
    banks: list[BootstrapBank],
    weights,
    alpha: float,
    b3: int,
    return_diagnostics: bool = False,
):
    """Level-correction multiplier via bisection.

    Performs ``b3`` bisection steps for the supremum of feasible ``u`` in
    ``(0, min_k 1/w_k)``, where ``u`` is feasible when the Monte Carlo
    estimate of the joint type I error at per-kernel levels ``u * w_k``
    stays at or below alpha. Returns the lower bisection endpoint, which
    is always feasible.
    """
    if len(banks) == 0:
        raise ConfigError("kernel collection must be non-empty")
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (len(banks),):
        raise ConfigError("one weight per kernel required")
    if np.any(weights <= 0) or weights.sum() > 1.0 + 1e-12:
        raise ConfigError("weights must be positive and sum to at most 1")
    check_positive_int(b3, "b3")
    if len({b.sorted_null.size for b in banks}) != 1 or len({b.extra_null.size for b in banks}) != 1:
        raise ConfigError("all banks must share the same B1 and B2")
    if banks[0].extra_null.size == 0:
        raise ConfigError("banks carry no level-correction statistics (B2 = 0)")

    m = banks[0].sorted_null.size
    sorted_banks = np.stack([b.sorted_null for b in banks])  # (K, B1+1)
    extra = np.stack([b.extra_null for b in banks])  # (K, B2)

    def p_hat(u: float) -> float:
        idx = np.ceil(m * (1.0 - u * weights)).astype(int)
        np.clip(idx, 1, m, out=idx)
        thresholds = sorted_banks[np.arange(len(banks)), idx - 1]
        return float(np.any(extra > thresholds[:, None], axis=0).mean())

    u_min, u_max = 0.0, float(1.0 / weights.max())
    boundary = u_max
    for _ in range(b3):
        u = 0.5 * (u_min + u_max)
        if p_hat(u) <= alpha:
            u_min = u
        else:
            u_max = u
        # Loop invariant: the retained lower endpoint is always feasible
        # (u_min = 0 is vacuously so: it is never evaluated).
        assert u_min == 0.0 or p_hat(u_min) <= alpha
    diagnostics = {"hit_lower_boundary": u_min == 0.0, "hit_upper_boundary": u_max == boundary}
    if return_diagnostics:
        return u_min, diagnostics
    return u_min


def ksdagg_test(
    X,
    model,
    config: AggConfig,
    stream: RngStream,
    debug_kernel_scales=None,
) -> TestReport:
    """Aggregated test over a kernel collection.

    Simulated statistics are shared jointly across kernels: the wild
    bootstrap reuses one Rademacher vector per replicate for every kernel,
    and the parametric bootstrap evaluates all kernels on one fresh sample
    per replicate. The quantile and level-correction replicates come from
    distinct streams.

    ``debug_kernel_scales`` multiplies each kernel's statistic and both of
    its simulated banks by a positive constant; decisions and u_alpha are
    invariant under it.
    """
    t0 = time.perf_counter()
    X = check_data_matrix(X, min_rows=2)
    n = X.shape[0]
    specs = config.specs()
    weights = np.asarray(config.collection.weights)
    notes = []

    if config.bootstrap == WILD:
        grams = stein_gram_collection(X, model, specs)
        observed = np.array([ksd_ustat(H) for H in grams])
        signs_q = rademacher_signs(config.b1, n, stream.child("quantile").generator())
        signs_l = rademacher_signs(config.b2, n, stream.child("level").generator())
        quantile_stats = np.stack([wild_bootstrap_stats(H, signs_q) for H in grams], axis=1)
        level_stats = np.stack([wild_bootstrap_stats(H, signs_l) for H in grams], axis=1)
        notes.append(_WILD_LEVEL_NOTE)
    else:
        observed = stein_ustats(X, model, specs)
        quantile_stats = parametric_null_stats(model, specs, n, config.b1, stream.child("quantile"))
        level_stats = parametric_null_stats(model, specs, n, config.b2, stream.child("level"))

    if debug_kernel_scales is not None:
        scales = np.asarray(debug_kernel_scales, dtype=np.float64)
        if scales.shape != (len(specs),) or np.any(scales <= 0):
            raise ConfigError("debug_kernel_scales must hold one positive factor per kernel")
        observed = observed * scales
        quantile_stats = quantile_stats * scales
        level_stats = level_stats * scales

    banks = [
        BootstrapBank.from_simulations(quantile_stats[:, k], observed[k], level_stats[:, k])
        for k in range(len(specs))
    ]
    u_alpha, diag = compute_u_alpha(banks, weights, config.alpha, config.b3, return_diagnostics=True)
    if diag["hit_lower_boundary"]:
        notes.append("u_alpha stayed at the lower search boundary; reported thresholds use the bank maximum")
    if diag["hit_upper_boundary"]:
        notes.append("u_alpha reached the upper search boundary; the level correction is not binding")

    m = config.b1 + 1
    kernels = []
    for k, spec in enumerate(specs):
        idx, clamped = quantile_index(m, u_alpha * weights[k])
        if clamped:
            notes.append(f"quantile index clamped for bandwidth {spec.bandwidth:g}")
        threshold = float(banks[k].sorted_null[idx - 1])
        stat = float(observed[k])
        kernels.append(
            KernelResult(spec.bandwidth, float(weights[k]), stat, threshold, bool(stat > threshold))
        )

    return TestReport(
        reject=any(k.reject for k in kernels),
        kernels=tuple(kernels),
        alpha=config.alpha,
        bootstrap=config.bootstrap,
        u_alpha=float(u_alpha),
        seed=(stream.seed, stream.key),
        n_test=n,
        elapsed_seconds=time.perf_counter() - t0,
        notes=tuple(notes),
    )
