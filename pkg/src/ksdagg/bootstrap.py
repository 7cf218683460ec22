"""Null-distribution simulation and Monte Carlo quantiles.

Two simulation schemes are provided. The wild bootstrap multiplies the
off-diagonal Gram entries by products of Rademacher signs, so all
replicates share one Gram matrix. The parametric bootstrap draws fresh
samples from the model for every replicate, which is far more expensive
(a new Gram per replicate) but yields non-asymptotic level control.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import CapabilityError, ConfigError
from .kernels import KernelSpec
from .rng import RngStream
from .stein import ksd_ustat, stein_gram, stein_ustats


@dataclass(frozen=True)
class BootstrapBank:
    """Simulated null statistics for one kernel.

    ``sorted_null`` holds the quantile bank: the simulated statistics plus
    the observed statistic, sorted ascending. ``extra_null`` holds the
    further statistics used for the aggregated level correction (empty for
    a single test).
    """

    sorted_null: np.ndarray
    original_stat: float
    extra_null: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        bank = np.asarray(self.sorted_null, dtype=np.float64)
        object.__setattr__(self, "sorted_null", bank)
        object.__setattr__(self, "extra_null", np.asarray(self.extra_null, dtype=np.float64))
        if bank.ndim != 1 or bank.size < 1:
            raise ConfigError("sorted_null must be a non-empty 1-D array")
        if np.any(np.diff(bank) < 0):
            raise ConfigError("sorted_null must be sorted ascending")
        if not np.any(bank == self.original_stat):
            raise ConfigError("the observed statistic must be a member of the sorted bank")

    @classmethod
    def from_simulations(cls, simulated, original_stat: float, extra=None) -> "BootstrapBank":
        values = np.append(np.asarray(simulated, dtype=np.float64), original_stat)
        values.sort(kind="stable")
        return cls(values, float(original_stat), np.empty(0) if extra is None else extra)


def rademacher_signs(count: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """A (count, n) array of i.i.d. +/-1 multipliers."""
    return rng.integers(0, 2, size=(count, n)).astype(np.float64) * 2.0 - 1.0


def wild_bootstrap_stat(H: np.ndarray, eps) -> float:
    """Signed off-diagonal mean ``sum_{i != j} eps_i eps_j H[i,j] / (N(N-1))``.

    Computed by masking the Gram with the sign outer product and summing in
    the same order as the unsigned statistic, so an all-ones (or all
    minus-ones) sign vector reproduces ``ksd_ustat(H)`` bit for bit.
    """
    H = np.asarray(H, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    n = H.shape[0]
    if eps.shape != (n,):
        raise ConfigError(f"eps must have shape ({n},), got {eps.shape}")
    if not np.all(np.abs(eps) == 1.0):
        raise ConfigError("eps entries must be +1 or -1")
    M = H * np.outer(eps, eps)
    return (M.sum() - np.trace(M)) / (n * (n - 1))


def wild_bootstrap_stats(H: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """Batched wild statistics, one per row of ``signs``.

    Uses the quadratic form ``e^T H e - trace(H)`` (valid since
    ``e_i^2 = 1``), evaluated with a single matrix product for all rows.
    """
    H = np.asarray(H, dtype=np.float64)
    signs = np.asarray(signs, dtype=np.float64)
    n = H.shape[0]
    if signs.ndim != 2 or signs.shape[1] != n:
        raise ConfigError(f"signs must have shape (count, {n}), got {signs.shape}")
    quad = np.einsum("bi,bi->b", signs @ H, signs)
    return (quad - np.trace(H)) / (n * (n - 1))


def _require_sampler(model) -> None:
    if getattr(model, "can_sample", False):
        return
    raise CapabilityError(
        "this model has no sampler, so the parametric bootstrap is unavailable; use the wild bootstrap instead"
    )


def parametric_bootstrap_stat(model, spec: KernelSpec, n: int, stream: RngStream) -> float:
    """Discrepancy statistic of one fresh model sample of size ``n``."""
    _require_sampler(model)
    X = model.sample(n, stream.generator())
    return ksd_ustat(stein_gram(X, model, spec))


def parametric_null_stats(model, specs, n: int, count: int, stream: RngStream) -> np.ndarray:
    """A (count, n_kernels) array of statistics from fresh model samples.

    Replicate ``b`` draws one dataset from its own child stream and
    evaluates every kernel on it, so the joint null distribution across
    kernels is preserved and each replicate is replayable in isolation.
    """
    _require_sampler(model)
    out = np.empty((count, len(specs)))
    for b in range(count):
        X = model.sample(n, stream.child(b).generator())
        out[b] = stein_ustats(X, model, specs)
    return out


def quantile_index(bank_size: int, level_complement: float) -> tuple[int, bool]:
    """1-based order-statistic index ``ceil(m * (1 - a))``, clamped to [1, m]."""
    raw = math.ceil(bank_size * (1.0 - level_complement))
    clamped = raw < 1 or raw > bank_size
    return min(max(raw, 1), bank_size), clamped


def empirical_quantile(bank: BootstrapBank, level_complement: float) -> float:
    """Monte Carlo (1 - a)-quantile: the ``ceil((B1+1)(1-a))``-th sorted value."""
    a = float(level_complement)
    if not 0.0 < a < 1.0:
        raise ConfigError(f"level_complement must lie in (0, 1), got {a}")
    m = bank.sorted_null.size
    idx, clamped = quantile_index(m, a)
    if clamped:
        warnings.warn(
            f"quantile index clamped to [1, {m}] for level_complement={a}; check weights and level",
            RuntimeWarning,
            stacklevel=2,
        )
    return float(bank.sorted_null[idx - 1])
