"""Eigen-based pseudoinverse and PSD factorization for Hermitian matrices."""

from __future__ import annotations

import numpy as np

from ._validation import check_hermitian

PINV_RCOND = 1e-12
PSD_RTOL = 1e-10


def hermitian_pinv(K, rcond: float = PINV_RCOND) -> tuple[np.ndarray, np.ndarray]:
    """Moore-Penrose pseudoinverse of a Hermitian PSD matrix and its square.

    Both come from one eigendecomposition so they share the same cutoff:
    eigenvalues at or below ``rcond * lambda_max`` are treated as zero.

    Returns
    -------
    pinv, pinv_sq : ndarray
    """
    K = check_hermitian(K, "K")
    w, U = np.linalg.eigh(K)
    top = np.abs(w).max(initial=0.0)
    keep = w > rcond * top
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / w[keep]
    Uk = U[:, keep]
    pinv = (Uk * inv[keep]) @ Uk.conj().T
    pinv_sq = (Uk * inv[keep] ** 2) @ Uk.conj().T
    return pinv, pinv_sq


def psd_factor(M, rtol: float = PSD_RTOL) -> tuple[np.ndarray, bool, float]:
    """Factor a Hermitian matrix as ``L @ L^H`` after clipping negative modes.

    Eigenvalues in ``[-rtol * |lambda|_max, 0)`` are rounding noise and are
    set to zero. Anything more negative means ``M`` is genuinely indefinite;
    it is clipped as well but reported through ``is_psd=False``.

    Returns
    -------
    factor : ndarray, shape (N, r)
        ``r`` is the number of strictly positive eigenvalues kept.
    is_psd : bool
    min_eigenvalue : float
    """
    M = check_hermitian(M, "M")
    M = (M + M.conj().T) / 2
    w, U = np.linalg.eigh(M)
    scale = np.abs(w).max(initial=0.0)
    min_eig = float(w.min(initial=0.0))
    is_psd = bool(min_eig >= -rtol * scale)
    keep = w > rtol * scale
    factor = U[:, keep] * np.sqrt(w[keep])
    return factor, is_psd, min_eig


def rows_times(X: np.ndarray, M: np.ndarray) -> np.ndarray:
    """``X @ M.T`` for complex rows ``X``, avoiding a complex upcast of real ``M``."""
    if np.iscomplexobj(M) or not np.iscomplexobj(X):
        return X @ M.T
    Mt = M.T
    # .real/.imag are strided views; BLAS needs contiguous operands
    out = np.empty((X.shape[0], M.shape[0]), dtype=np.result_type(X.dtype, M.dtype))
    out.real = np.ascontiguousarray(X.real) @ Mt
    out.imag = np.ascontiguousarray(X.imag) @ Mt
    return out
