"""Small input-validation helpers shared across modules."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils.validation import check_array

__all__ = ["check_sample", "check_epsilon", "check_positive", "check_count"]


def check_sample(points, *, multivariate: bool = False, name: str = "points") -> np.ndarray:
    """Return ``points`` as a finite float array.

    Univariate samples come back 1-D; multivariate samples come back as an
    ``(n, d)`` array. Empty samples are rejected.
    """
    if multivariate:
        arr = np.asarray(points, dtype=float)
        if arr.ndim == 1:
            raise ValueError(f"{name} must be a 2-D array of shape (n, d)")
        return check_array(arr, ensure_2d=True, dtype=float, input_name=name)
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    arr = check_array(arr.reshape(-1, 1), dtype=float, input_name=name)[:, 0]
    return arr


def check_epsilon(epsilon, *, name: str = "epsilon") -> float:
    """Validate a contamination proportion in ``[0, 1/2]``."""
    if not isinstance(epsilon, numbers.Real) or isinstance(epsilon, bool):
        raise TypeError(f"{name} must be a real number")
    epsilon = float(epsilon)
    if not (0.0 <= epsilon <= 0.5):
        raise ValueError(f"{name} must lie in [0, 1/2], got {epsilon}")
    return epsilon


def check_positive(value, name: str, *, allow_inf: bool = False) -> float:
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise TypeError(f"{name} must be a real number")
    value = float(value)
    if np.isnan(value) or value <= 0 or (np.isinf(value) and not allow_inf):
        raise ValueError(f"{name} must be positive{'' if allow_inf else ' and finite'}, got {value}")
    return value


def check_count(value, name: str, *, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value
