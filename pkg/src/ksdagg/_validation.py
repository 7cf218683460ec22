"""Input validation helpers shared by the functional API and the estimators."""

from __future__ import annotations

import math

import numpy as np

from .exceptions import ConfigError, DataError

# Algorithm inputs restrict the level to (0, 1/e).
ALPHA_UPPER = math.exp(-1.0)


def check_data_matrix(X, *, min_rows: int = 1, name: str = "X") -> np.ndarray:
    """Coerce ``X`` to a 2-D float64 array of finite sample rows.

    1-D input is treated as a single-feature sample set and reshaped to
    a column. Raises ``DataError`` on non-finite entries or too few rows.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise DataError(f"{name} must be a 2-D array of shape (n_samples, n_features), got ndim={X.ndim}")
    if X.shape[0] < min_rows:
        raise DataError(f"{name} needs at least {min_rows} rows, got {X.shape[0]}")
    if not np.all(np.isfinite(X)):
        raise DataError(f"{name} contains non-finite entries")
    return X


def check_alpha(alpha: float, *, strict_upper: bool = True) -> float:
    """Validate a test level; strict mode enforces the (0, 1/e) range."""
    alpha = float(alpha)
    upper = ALPHA_UPPER if strict_upper else 1.0
    if not 0.0 < alpha < upper:
        raise ConfigError(f"alpha must lie in (0, {upper:.6g}), got {alpha}")
    return alpha


def check_positive_int(value, name: str) -> int:
    if int(value) != value or int(value) < 1:
        raise ConfigError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def as_generator(seed) -> np.random.Generator:
    """Return a Generator from a seed, SeedSequence, Generator, or None."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
