"""Score models: densities known through their score function.

A model exposes ``dim``, a vectorised ``score`` (gradient of the
log-density, row per sample), and optionally ``sample``. Sampling is what
enables the parametric bootstrap; models without it still support the wild
bootstrap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import as_generator, check_data_matrix, check_positive_int
from .exceptions import CapabilityError, ConfigError, DataError


class ScoreModel:
    """Base class: a density accessed through its score function."""

    dim: int = 1
    can_sample: bool = False

    def score(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sample(self, n: int, rng) -> np.ndarray:
        raise CapabilityError(
            f"{type(self).__name__} cannot draw samples; use the wild bootstrap for this model"
        )


@dataclass(frozen=True)
class GaussianModel(ScoreModel):
    """Isotropic Gaussian with mean vector ``mean`` and scale ``sigma``."""

    mean: tuple = (0.0,)
    sigma: float = 1.0

    can_sample = True

    def __post_init__(self):
        mean = tuple(float(m) for m in np.atleast_1d(self.mean))
        object.__setattr__(self, "mean", mean)
        if not self.sigma > 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")

    @property
    def dim(self) -> int:
        return len(self.mean)

    def score(self, X):
        X = check_data_matrix(X)
        return (np.asarray(self.mean) - X) / self.sigma**2

    def sample(self, n, rng):
        n = check_positive_int(n, "n")
        rng = as_generator(rng)
        return rng.normal(self.mean, self.sigma, size=(n, self.dim))


def standard_normal_model(dim: int = 1) -> GaussianModel:
    return GaussianModel((0.0,) * dim, 1.0)


@dataclass(frozen=True)
class GammaModel(ScoreModel):
    """Gamma distribution in shape/scale parameterisation; support x > 0."""

    shape: float = 5.0
    scale: float = 5.0

    dim = 1
    can_sample = True

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ConfigError(f"shape and scale must be positive, got ({self.shape}, {self.scale})")

    def score(self, X):
        X = check_data_matrix(X)
        if np.any(X <= 0):
            raise DataError("gamma score is undefined at x <= 0")
        return (self.shape - 1.0) / X - 1.0 / self.scale

    def sample(self, n, rng):
        n = check_positive_int(n, "n")
        rng = as_generator(rng)
        return rng.gamma(self.shape, self.scale, size=(n, 1))


class RbmModel(ScoreModel):
    """Gaussian-Bernoulli restricted Boltzmann machine.

    Joint density over the continuous visible ``x`` and the +/-1-valued
    hidden ``h``, up to normalisation:

        p(x, h) ~ exp(x^T W h + b^T x + c^T h - ||x||^2 / 2)

    Marginalising the hidden units gives the closed-form score

        grad log p(x) = b - x + W tanh(W^T x + c),

    which stays finite for any input (tanh saturates). The same
    conditionals drive the Gibbs sampler:

        h_j | x  ~  +/-1 with P(h_j = 1) = sigmoid(2 ((W^T x)_j + c_j))
        x | h    ~  Normal(b + W h, I)
    """

    can_sample = True

    def __init__(self, weights, visible_bias, hidden_bias, burn_in: int = 2000):
        W = np.asarray(weights, dtype=np.float64)
        b = np.asarray(visible_bias, dtype=np.float64).ravel()
        c = np.asarray(hidden_bias, dtype=np.float64).ravel()
        if W.ndim != 2 or W.shape != (b.size, c.size):
            raise ConfigError(
                f"weights must have shape (len(visible_bias), len(hidden_bias)); got {W.shape}"
            )
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ConfigError("RBM parameters must be finite")
        if burn_in < 0:
            raise ConfigError(f"burn_in must be non-negative, got {burn_in}")
        self.weights = W
        self.visible_bias = b
        self.hidden_bias = c
        self.burn_in = int(burn_in)

    @property
    def dim(self) -> int:
        return self.visible_bias.size

    @property
    def hidden_dim(self) -> int:
        return self.hidden_bias.size

    def score(self, X):
        X = check_data_matrix(X)
        T = np.tanh(X @ self.weights + self.hidden_bias)
        return self.visible_bias - X + T @ self.weights.T

    def log_density(self, X):
        """Unnormalised marginal log-density (hidden units summed out)."""
        X = check_data_matrix(X)
        Z = X @ self.weights + self.hidden_bias
        # log(2 cosh z) = |z| + log1p(exp(-2|z|)); safe for large |z|
        log_cosh = np.abs(Z) + np.log1p(np.exp(-2.0 * np.abs(Z)))
        return X @ self.visible_bias - 0.5 * np.einsum("ij,ij->i", X, X) + log_cosh.sum(axis=1)

    def sample(self, n, rng):
        """One independent Gibbs chain per sample, each run for ``burn_in`` sweeps."""
        n = check_positive_int(n, "n")
        rng = as_generator(rng)
        X = self.visible_bias + rng.standard_normal((n, self.dim))
        for _ in range(self.burn_in):
            # P(h_j = 1 | x) = sigmoid(2 z) = (1 + tanh(z)) / 2, z = (W^T x)_j + c_j
            prob_up = 0.5 * (1.0 + np.tanh(X @ self.weights + self.hidden_bias))
            H = np.where(rng.random((n, self.hidden_dim)) < prob_up, 1.0, -1.0)
            X = self.visible_bias + H @ self.weights.T + rng.standard_normal((n, self.dim))
        return X


def make_random_rbm(dim: int, hidden_dim: int, rng, burn_in: int = 2000) -> RbmModel:
    """RBM with standard-normal biases and +/-1 (Rademacher) weights."""
    rng = as_generator(rng)
    W = rng.integers(0, 2, size=(dim, hidden_dim)).astype(np.float64) * 2.0 - 1.0
    b = rng.standard_normal(dim)
    c = rng.standard_normal(hidden_dim)
    return RbmModel(W, b, c, burn_in=burn_in)


def perturb_rbm(model: RbmModel, sigma: float, rng) -> RbmModel:
    """Copy of the model with Gaussian noise of scale ``sigma`` added to the weights."""
    if sigma < 0:
        raise ConfigError(f"sigma must be non-negative, got {sigma}")
    if sigma == 0:
        W = model.weights.copy()
    else:
        rng = as_generator(rng)
        W = model.weights + sigma * rng.standard_normal(model.weights.shape)
    return RbmModel(W, model.visible_bias.copy(), model.hidden_bias.copy(), burn_in=model.burn_in)
