"""Block delay-channel matrices A (SVs to the forged position) and F (SVs to Eve)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import ValidationError, check_matrix
from .scenario import Scenario

RANK_TOL = 1e-10


@dataclass(frozen=True)
class DelayChannel:
    """Concatenation ``[S_1 | ... | S_m]`` of per-SV shift blocks.

    Block ``i`` embeds the ``n x n`` identity ``delays[i]`` rows down in an
    ``N``-row matrix, so each column carries exactly one unit entry.
    """

    delays: tuple[int, ...]
    n: int
    rows: int

    @property
    def m(self) -> int:
        return len(self.delays)

    @property
    def delta(self) -> int:
        return max(self.delays)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.m * self.n)

    @property
    def matrix(self) -> np.ndarray:
        M = np.zeros(self.shape)
        cols = np.arange(self.n)
        for i, tau in enumerate(self.delays):
            M[tau + cols, i * self.n + cols] = 1.0
        return M

    @property
    def blocks(self) -> list[np.ndarray]:
        M = self.matrix
        return [M[:, i * self.n:(i + 1) * self.n] for i in range(self.m)]

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Channel output for words ``X`` of shape ``(..., m*n)`` by shift-and-add."""
        X = np.asarray(X)
        out = np.zeros(X.shape[:-1] + (self.rows,), dtype=np.result_type(X, np.float64))
        for i, tau in enumerate(self.delays):
            out[..., tau:tau + self.n] += X[..., i * self.n:(i + 1) * self.n]
        return out

    def __array__(self, dtype=None, copy=None):
        M = self.matrix
        return M if dtype is None else M.astype(dtype)


def build_delay_channel(delays, n: int, rows: int | None = None) -> DelayChannel:
    """Build the pure-delay, unit-gain channel for integer ``delays``.

    Parameters
    ----------
    delays : sequence of int
        Per-SV sample delays (not re-normalized here).
    n : int
        Word length per SV.
    rows : int, optional
        Padded output length; defaults to ``n + max(delays)``.
    """
    delays = tuple(int(t) for t in delays)
    if not delays:
        raise ValidationError("delays", "at least one delay is required")
    if min(delays) < 0:
        raise ValidationError("delays", "delays must be non-negative")
    needed = n + max(delays)
    rows = needed if rows is None else int(rows)
    if rows < needed:
        raise ValidationError("rows", f"padded length {rows} is below n + max(delays) = {needed}")
    return DelayChannel(delays=delays, n=int(n), rows=rows)


def channels_for(scenario: Scenario) -> tuple[DelayChannel, DelayChannel]:
    """Return ``(A, F)`` padded to the scenario's common observation length."""
    N = scenario.padded_length
    A = build_delay_channel(scenario.tau_forged, scenario.n, N)
    F = build_delay_channel(scenario.tau_eve, scenario.n, N)
    return A, F


def _as_matrix(M) -> np.ndarray:
    if isinstance(M, DelayChannel):
        return M.matrix
    return check_matrix(M)


def null_space(M, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of ker(M); singular values <= tol*s_max count as zero."""
    M = _as_matrix(M)
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    cutoff = tol * (s[0] if s.size else 0.0)
    rank = int(np.count_nonzero(s > cutoff))
    return Vh[rank:].conj().T


def kernel_condition(A, F, tol: float = RANK_TOL) -> bool:
    """True iff ker(A) is not contained in ker(F)."""
    A, F = _as_matrix(A), _as_matrix(F)
    if A.shape[1] != F.shape[1]:
        raise ValidationError("F", "A and F must have the same number of columns")
    basis = null_space(A, tol)
    if basis.shape[1] == 0:
        return False
    s_F = np.linalg.norm(F, 2)
    if s_F == 0:
        return False
    s = np.linalg.svd(F @ basis, compute_uv=False)
    return bool(np.any(s > tol * s_F))
