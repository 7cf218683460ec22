"""Base kernels, pairwise distances, and bandwidth collections.

Two kernel families are supported, both radial in the squared distance
``u = ||x - y||^2`` and scaled by a bandwidth ``lam``:

* IMQ (inverse multiquadric): ``k(u) = (1 + u/lam^2)^(-beta)`` for
  ``beta in (0, 1)``.  The normalised form is used rather than the
  proportional form ``lam^(2 beta) (lam^2 + u)^(-beta)``; the tests built
  on top are invariant under positive scaling of the kernel, and the
  normalised form cannot overflow for large bandwidths.
* Gaussian: ``k(u) = exp(-u/lam^2)``.

The squared-distance matrix is computed once per dataset and shared across
all bandwidths, which is where the quadratic cost of these tests lives.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_data_matrix
from .exceptions import ConfigError, DegenerateDataError

IMQ = "imq"
GAUSSIAN = "gaussian"
FAMILIES = (IMQ, GAUSSIAN)


@dataclass(frozen=True)
class KernelSpec:
    """A base kernel family plus bandwidth.

    Parameters
    ----------
    family : str
        ``"imq"`` or ``"gaussian"``.
    bandwidth : float
        Positive bandwidth ``lam``.
    imq_beta : float
        Exponent of the IMQ kernel, in (0, 1). Ignored for the Gaussian
        family.
    scale : float
        Debug multiplier applied to the kernel (and therefore to every
        derived Stein value). The tests are invariant under this scaling;
        it exists so that the invariance can be exercised directly.
    """

    family: str
    bandwidth: float
    imq_beta: float = 0.5
    scale: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if not self.bandwidth > 0:
            raise ConfigError(f"bandwidth must be positive, got {self.bandwidth}")
        if self.family == IMQ and not 0.0 < self.imq_beta < 1.0:
            raise ConfigError(f"imq_beta must lie in (0, 1), got {self.imq_beta}")
        if not self.scale > 0:
            raise ConfigError(f"scale must be positive, got {self.scale}")


@dataclass(frozen=True)
class BandwidthCollection:
    """An ordered set of bandwidths with positive weights summing to <= 1."""

    bandwidths: tuple
    weights: tuple

    def __post_init__(self):
        bw = tuple(float(b) for b in self.bandwidths)
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "bandwidths", bw)
        object.__setattr__(self, "weights", w)
        if len(bw) != len(w):
            raise ConfigError("bandwidths and weights must have the same length")
        if len(bw) == 0:
            raise ConfigError("collection must contain at least one bandwidth")
        if any(b <= 0 for b in bw):
            raise ConfigError("bandwidths must be positive")
        if any(x <= 0 for x in w):
            raise ConfigError("weights must be positive")
        if sum(w) > 1.0 + 1e-12:
            raise ConfigError(f"weights must sum to at most 1, got {sum(w)}")

    def __len__(self) -> int:
        return len(self.bandwidths)

    def specs(self, family: str = IMQ, imq_beta: float = 0.5) -> list[KernelSpec]:
        return [KernelSpec(family, b, imq_beta) for b in self.bandwidths]


def pairwise_sq_dists(X) -> np.ndarray:
    """Symmetric matrix of squared Euclidean distances ``||x_i - x_j||^2``.

    The Gram-expansion ``|x|^2 + |y|^2 - 2 x.y`` is used, clipped at zero,
    with the upper triangle mirrored so the result is exactly symmetric
    with an exactly zero diagonal.
    """
    X = check_data_matrix(X)
    sq_norms = np.einsum("ij,ij->i", X, X)
    D = sq_norms[:, None] + sq_norms[None, :] - 2.0 * (X @ X.T)
    np.maximum(D, 0.0, out=D)
    D = np.triu(D, 1)
    D = D + D.T
    return D


def kernel_value(sq_dist, spec: KernelSpec):
    """Evaluate the base kernel at the given squared distance(s)."""
    u = np.asarray(sq_dist, dtype=np.float64)
    if np.any(u < 0):
        raise ValueError("squared distances must be non-negative")
    lam2 = spec.bandwidth**2
    if spec.family == GAUSSIAN:
        out = np.exp(-u / lam2)
    else:
        out = _imq_power(1.0 + u / lam2, spec.imq_beta)
    if spec.scale != 1.0:
        out = spec.scale * out
    return out if out.ndim else float(out)


def _imq_power(base: np.ndarray, beta: float) -> np.ndarray:
    # beta = 1/2 is the common case; rsqrt avoids the much slower pow.
    if beta == 0.5:
        return 1.0 / np.sqrt(base)
    return base ** (-beta)


def median_bandwidth(X) -> float:
    """Median of the pairwise L2 distances over all unordered sample pairs.

    Uses the even-count convention of the sample median (mean of the two
    central order statistics). Raises ``DegenerateDataError`` when every
    pairwise distance is zero, since no scale can be read off the data.
    """
    X = check_data_matrix(X, min_rows=2)
    D = pairwise_sq_dists(X)
    iu = np.triu_indices(X.shape[0], 1)
    dists = np.sqrt(D[iu])
    med = float(np.median(dists))
    if med == 0.0 and not np.any(dists > 0):
        raise DegenerateDataError("all pairwise distances are zero; median bandwidth undefined")
    if med == 0.0:
        # A zero median with some distinct points still gives no usable
        # bandwidth for a radial kernel.
        raise DegenerateDataError("median pairwise distance is zero")
    return med


def power_of_two_collection(lam_med: float, l_lo: int, l_hi: int, weighting: str = "uniform") -> BandwidthCollection:
    """Bandwidths ``2^i * lam_med`` for ``i = l_lo..l_hi`` with uniform weights."""
    if not lam_med > 0:
        raise ConfigError(f"lam_med must be positive, got {lam_med}")
    if not l_lo < l_hi:
        raise ConfigError(f"need l_lo < l_hi, got ({l_lo}, {l_hi})")
    if weighting != "uniform":
        raise ConfigError(f"unsupported weighting {weighting!r}")
    exponents = range(int(l_lo), int(l_hi) + 1)
    bandwidths = tuple(float(2.0**i) * lam_med for i in exponents)
    w = 1.0 / len(bandwidths)
    return BandwidthCollection(bandwidths, (w,) * len(bandwidths))


def geometric_collection(X, n_bandwidths: int = 10) -> BandwidthCollection:
    """Dimension-normalised geometric ladder of bandwidths from the data.

    The largest pairwise distance ``lam_M`` (floored at 2) sets the span;
    the ``i``-th bandwidth is ``d^-1 * max(lam_M, 2)^((i-1)/(B-1))`` for
    ``i = 1..B``, a geometric discretisation of ``[1/d, max(lam_M, 2)/d]``.
    Weights are uniform ``1/B``.
    """
    X = check_data_matrix(X, min_rows=2)
    B = int(n_bandwidths)
    if B < 2:
        raise ConfigError(f"need at least 2 bandwidths, got {B}")
    d = X.shape[1]
    lam_m = float(np.sqrt(np.max(pairwise_sq_dists(X))))
    lam_max = max(lam_m, 2.0)
    bandwidths = tuple(lam_max ** ((i - 1) / (B - 1)) / d for i in range(1, B + 1))
    return BandwidthCollection(bandwidths, (1.0 / B,) * B)


def collection_from_bandwidths(bandwidths, weights=None) -> BandwidthCollection:
    """Wrap explicit bandwidths, defaulting to uniform weights."""
    bandwidths = tuple(float(b) for b in np.atleast_1d(bandwidths))
    if weights is None:
        weights = (1.0 / len(bandwidths),) * len(bandwidths)
    return BandwidthCollection(bandwidths, tuple(weights))
