"""Input validation shared by the estimators and the evaluation harness."""

from __future__ import annotations

import numbers

import numpy as np


def check_positive_int(value, name: str) -> int:
    if not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    value = int(value)
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")
    return value


def check_positive_float(value, name: str) -> float:
    value = float(value)
    if not value > 0.0 or not np.isfinite(value):
        raise ValueError(f"{name} must be a finite positive number, got {value}")
    return value


def ensure_rng(seed_or_rng) -> np.random.Generator:
    """Accept a seed or an existing Generator; always return a Generator."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def as_sample_matrix(samples, n_features: int, name="received"):
    """Coerce received samples to a (n_words, n_features) float matrix.

    A single 1-D word is accepted; the second return value flags it so callers
    can squeeze the output back to one dimension.
    """
    arr = np.asarray(samples, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 1-D or 2-D, got shape {arr.shape}")
    if arr.shape[1] != n_features:
        raise ValueError(
            f"{name} has {arr.shape[1]} samples per word, expected {n_features}"
        )
    return arr, single
