"""Input validation helpers shared by the estimators and analytics.

scikit-learn's ``check_array`` rejects complex input, and every signal in
this package is complex baseband, so the checks live here.
"""

from __future__ import annotations

import numbers

import numpy as np


class ValidationError(ValueError):
    """Raised when an input violates a documented invariant.

    Parameters
    ----------
    field : str
        Name of the offending field or argument.
    message : str
        Human-readable description of the violation.
    """

    def __init__(self, field: str, message: str):
        super().__init__(message)
        self.field = field


def check_matrix(M, name: str = "matrix", *, square: bool = False) -> np.ndarray:
    """Return ``M`` as a finite 2-D float or complex array."""
    M = np.asarray(M)
    if M.ndim != 2:
        raise ValidationError(name, f"{name} must be 2-D, got shape {M.shape}")
    if not np.issubdtype(M.dtype, np.complexfloating):
        M = M.astype(np.float64, copy=False)
    if not np.all(np.isfinite(M)):
        raise ValidationError(name, f"{name} contains non-finite entries")
    if square and M.shape[0] != M.shape[1]:
        raise ValidationError(name, f"{name} must be square, got shape {M.shape}")
    return M


def check_hermitian(M, name: str = "matrix", rtol: float = 1e-10) -> np.ndarray:
    M = check_matrix(M, name, square=True)
    scale = max(np.abs(M).max(initial=0.0), 1.0)
    if np.abs(M - M.conj().T).max(initial=0.0) > rtol * scale:
        raise ValidationError(name, f"{name} must be Hermitian")
    return M


def check_signals(X, dim: int, name: str = "X") -> np.ndarray:
    """Return ``X`` as a complex array of shape ``(n_trials, dim)``.

    A single 1-D vector is promoted to one row.
    """
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[np.newaxis, :]
    if X.ndim != 2:
        raise ValidationError(name, f"{name} must be 1-D or 2-D, got {X.ndim}-D")
    if X.shape[1] != dim:
        raise ValidationError(name, f"{name} must have {dim} columns, got {X.shape[1]}")
    return X.astype(np.complex128, copy=False)


def check_positive(value, name: str) -> float:
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise ValidationError(name, f"{name} must be a real number, got {value!r}")
    if not np.isfinite(value) or value <= 0:
        raise ValidationError(name, f"{name} must be > 0, got {value!r}")
    return float(value)


def check_count(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValidationError(name, f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValidationError(name, f"{name} must be ≥ {minimum}")
    return int(value)


def check_delays(values, m: int, name: str) -> tuple[int, ...]:
    """Validate an integer delay vector of length ``m`` and shift it to min 0."""
    arr = np.asarray(values)
    if arr.ndim != 1 or arr.size != m:
        raise ValidationError(name, f"{name} must have length m={m}, got {arr.size}")
    if arr.size and not np.all(np.equal(np.mod(arr, 1), 0)):
        raise ValidationError(name, f"{name} must contain integer sample delays")
    arr = arr.astype(np.int64)
    if np.any(arr < 0):
        raise ValidationError(name, f"{name} must be non-negative")
    return normalize_delays(arr)


def normalize_delays(delays) -> tuple[int, ...]:
    arr = np.asarray(delays, dtype=np.int64)
    if arr.size == 0:
        return ()
    return tuple(int(t) for t in arr - arr.min())
