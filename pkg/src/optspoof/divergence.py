"""KL-divergence analytics for linear-Gaussian spoofing attacks.

Every quantity here is conditional on Bob knowing the transmitted word ``x``:
the divergence compares ``p(v | x)`` under attack against ``p(y | x)`` in
nominal conditions and averages over ``x``. It depends on the distribution of
``x`` only through ``K_x``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.special import rel_entr

from ._validation import ValidationError, check_hermitian, check_positive
from .attack import AttackPolicy, _as_matrix, sample_attack
from .scenario import Scenario, Signaling
from .signaling import Stream, draw_noise, draw_words, substream

EIG_CLIP = 1e-14
PSD_RTOL = 1e-10
BISECTION_TOL = 1e-10


@dataclass(frozen=True)
class GaussianJointModel:
    """Second-order description of ``(x, y, z, v)``.

    ``K_x`` and the cross covariances are ``E[a b^H]``; the noise covariances
    ``K_B``, ``K_E``, ``K_tilde_B`` are per real component, as are ``G K_E G^H``
    and ``C C^H`` inside ``K_v``.
    """

    K_x: np.ndarray
    K_xy: np.ndarray
    K_y: np.ndarray
    K_xz: np.ndarray
    K_z: np.ndarray
    K_xv: np.ndarray
    K_v: np.ndarray
    K_B: np.ndarray
    K_E: np.ndarray
    K_tilde_B: np.ndarray

    @classmethod
    def build(cls, A, F, policy: AttackPolicy, mx: float, sigma_b2: float) -> "GaussianJointModel":
        A = _as_matrix(A, "A")
        F = _as_matrix(F, "F")
        N, mn = A.shape
        K_x = mx * np.eye(mn)
        K_B = sigma_b2 * np.eye(N)
        K_E = policy.sigma_e2 * np.eye(F.shape[0])
        K_tB = policy.sigma_bt2 * np.eye(N)
        G = policy.G
        return cls(
            K_x=K_x,
            K_xy=K_x @ A.conj().T,
            K_y=A @ K_x @ A.conj().T + K_B,
            K_xz=K_x @ F.conj().T,
            K_z=F @ K_x @ F.conj().T + K_E,
            K_xv=K_x @ F.conj().T @ G.conj().T,
            K_v=G @ F @ K_x @ F.conj().T @ G.conj().T + G @ K_E @ G.conj().T + policy.cov_attack + K_tB,
            K_B=K_B,
            K_E=K_E,
            K_tilde_B=K_tB,
        )


@dataclass(frozen=True)
class DivergenceReport:
    """Closed-form divergence of one attack.

    ``f_forward = t1 + t2`` uses the real-Gaussian normalization for the
    covariance-mismatch term. Under circular complex noise that term doubles,
    which ``f_exact = 2 t1 + t2`` accounts for; the two coincide whenever the
    attack noise matches Bob's (``t1 = 0``).
    """

    t1: float
    t2: float
    f_forward: float
    f_reverse: float
    f_exact: float
    d_min: float
    k: float
    lambda0: float
    eigenvalues: np.ndarray

    def as_record(self) -> dict:
        rec = asdict(self)
        rec.pop("eigenvalues")
        rec["eig_min"] = float(self.eigenvalues.min(initial=np.inf))
        rec["eig_max"] = float(self.eigenvalues.max(initial=-np.inf))
        return rec


def _covariance_terms(lam: np.ndarray, sigma_b2: float) -> tuple[float, float]:
    """Sums of ``u - 1 - log u`` for ``u = lam/sigma_b2`` and ``u = sigma_b2/lam``."""
    if lam.size == 0:
        return 0.0, 0.0
    if lam.min() <= EIG_CLIP * lam.max():
        return math.inf, math.inf
    d = lam / sigma_b2 - 1.0
    fwd = np.maximum(d - np.log1p(d), 0.0)
    e = sigma_b2 / lam - 1.0
    rev = np.maximum(e - np.log1p(e), 0.0)
    return math.fsum(fwd), math.fsum(rev)


def _sq_norm(M) -> float:
    # squared Frobenius norm without the sqrt/square round trip
    return float(np.sum(M.real**2 + M.imag**2) if np.iscomplexobj(M) else np.sum(M * M))


def _as_input_cov(K_x, mn: int) -> np.ndarray:
    if np.ndim(K_x) == 0:
        return check_positive(float(K_x), "K_x") * np.eye(mn)
    K_x = check_hermitian(K_x, "K_x")
    if K_x.shape != (mn, mn):
        raise ValidationError("K_x", f"K_x must be {mn}x{mn}")
    return K_x


def kl_closed_form(A, B, K_x, K_eta, sigma_b2: float) -> DivergenceReport:
    """Divergence of the attack ``v = B x + eta`` against ``y = A x + w_B``.

    Parameters
    ----------
    A, B : array_like, shape (N, m*n)
        Legitimate and forged channel matrices.
    K_x : float or array_like
        Input covariance, or a scalar ``mx`` meaning ``mx * I``.
    K_eta : array_like, shape (N, N)
        Per-component covariance of the total attack noise.
    sigma_b2 : float
        Per-component noise variance at Bob.
    """
    A = _as_matrix(A, "A")
    B = _as_matrix(B, "B")
    if A.shape != B.shape:
        raise ValidationError("B", f"A {A.shape} and B {B.shape} differ in shape")
    N, mn = A.shape
    K_x = _as_input_cov(K_x, mn)
    K_eta = check_hermitian(K_eta, "K_eta")
    if K_eta.shape != (N, N):
        raise ValidationError("K_eta", f"K_eta must be {N}x{N}")
    sigma_b2 = check_positive(sigma_b2, "sigma_b2")

    lam = np.linalg.eigvalsh((K_eta + K_eta.conj().T) / 2)
    if lam.size and lam.min() < -PSD_RTOL * np.abs(lam).max():
        raise ValidationError("K_eta", "K_eta is not positive semidefinite")
    fwd_sum, rev_sum = _covariance_terms(lam, sigma_b2)
    t1 = 0.5 * fwd_sum

    D = B - A
    shift = D @ K_x @ D.conj().T
    t2 = float(np.trace(shift).real) / (2.0 * sigma_b2)

    if math.isinf(rev_sum):
        rev_mean = math.inf
    else:
        rev_mean = 0.5 * float(np.trace(cho_solve(cho_factor(K_eta), shift)).real)

    mx = float(np.trace(K_x).real) / mn
    norm_a2 = _sq_norm(A)
    k = _sq_norm(D) / norm_a2 if norm_a2 > 0 else math.nan
    lambda0 = mx / sigma_b2 * norm_a2 / mn
    return DivergenceReport(
        t1=t1,
        t2=t2,
        f_forward=t1 + t2,
        f_reverse=0.5 * rev_sum + rev_mean,
        f_exact=2.0 * t1 + t2,
        d_min=t2,
        k=k,
        lambda0=lambda0,
        eigenvalues=lam,
    )


def policy_divergence(A, policy: AttackPolicy, scenario: Scenario) -> DivergenceReport:
    return kl_closed_form(A, policy.B, scenario.mx, policy.K_eta, scenario.sigma_b2)


def d_min_decomposition(A, B, mx: float, sigma_b2: float) -> tuple[float, float, float]:
    """``(d_min, k, lambda0)`` with ``d_min = (m n / 2) k lambda0`` for ``K_x = mx I``."""
    A = _as_matrix(A, "A")
    B = _as_matrix(B, "B")
    norm_a2 = _sq_norm(A)
    if norm_a2 == 0:
        raise ValidationError("A", "A has zero Frobenius norm")
    mn = A.shape[1]
    k = _sq_norm(A - B) / norm_a2
    lambda0 = mx / sigma_b2 * norm_a2 / mn
    return mn / 2.0 * k * lambda0, k, lambda0


def symmetry_check(report: DivergenceReport) -> float:
    return abs(report.f_forward - report.f_reverse)


def h_function(beta, alpha):
    """Binary divergence ``beta log(beta/(1-alpha)) + (1-beta) log((1-beta)/alpha)``.

    Any ``(alpha, beta)`` operating point of a test satisfies
    ``h(beta, alpha) <= D``. Returns ``inf`` where a nonzero mass meets a
    zero probability.
    """
    beta = np.asarray(beta, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if np.any((beta < 0) | (beta > 1)) or np.any((alpha < 0) | (alpha > 1)):
        raise ValidationError("alpha", "alpha and beta must lie in [0, 1]")
    out = rel_entr(beta, 1.0 - alpha) + rel_entr(1.0 - beta, alpha)
    return out if out.ndim else float(out)


def bound_curve(D: float, alphas) -> np.ndarray:
    """Smallest miss probability compatible with divergence ``D`` at each ``alpha``.

    Returns an array of shape ``(len(alphas), 2)`` with columns
    ``alpha, beta_min``. Solved by bisection on ``[0, 1 - alpha]``, where ``h``
    falls monotonically from ``-log(alpha)`` to 0.
    """
    if not D >= 0:
        raise ValidationError("D", f"D must be >= 0, got {D!r}")
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    if np.any((alphas < 0) | (alphas > 1)):
        raise ValidationError("alphas", "alphas must lie in [0, 1]")
    with np.errstate(divide="ignore"):
        saturated = D >= -np.log(alphas)
    lo = np.zeros_like(alphas)
    hi = 1.0 - alphas
    active = ~saturated
    while np.any(active & (hi - lo > BISECTION_TOL)):
        mid = 0.5 * (lo + hi)
        above = h_function(mid, alphas) > D
        lo = np.where(active & above, mid, lo)
        hi = np.where(active & ~above, mid, hi)
    beta = np.where(saturated, 0.0, hi)
    return np.column_stack([alphas, beta])


@dataclass(frozen=True)
class KLEstimate:
    estimate: float
    stderr: float
    samples: int


def _real_draws(scheme, mx, dim, rng, size):
    if Signaling(scheme) is Signaling.BPSK:
        return draw_words(scheme, mx, dim, rng, size).real
    return np.sqrt(mx) * rng.standard_normal((size, dim))


def _real_part(M, name):
    M = np.asarray(M)
    if np.iscomplexobj(M):
        if np.abs(M.imag).max(initial=0.0) > 1e-12 * max(np.abs(M).max(initial=0.0), 1.0):
            raise ValidationError(name, f"real convention needs a real-valued {name}")
        M = M.real
    return M


def kl_monte_carlo(A, F, policy: AttackPolicy, scenario: Scenario, samples: int = 1_000_000,
                   *, convention: str = "complex", batch: int = 50_000, seed: int | None = None) -> KLEstimate:
    """Sample-mean estimate of ``E[log p(v | x) / p(y = v | x)]`` under attack.

    Draws ``x``, Eve's noise and the attack noise, forms ``v`` through the
    attack map, and evaluates both Gaussian conditional log-densities in
    closed form. ``convention="complex"`` uses circular complex densities
    (the simulator's own model); ``"real"`` draws every signal and noise as a
    real Gaussian, the model in which the real-normalized closed form is exact.
    """
    if convention not in ("complex", "real"):
        raise ValidationError("convention", "convention must be 'complex' or 'real'")
    A = _as_matrix(A, "A")
    F = _as_matrix(F, "F")
    N, mn = A.shape
    seed = scenario.seed if seed is None else seed
    sigma_b2 = scenario.sigma_b2
    K_eta = policy.K_eta
    L = np.linalg.cholesky(K_eta)
    logdet_eta = 2.0 * float(np.sum(np.log(np.abs(np.diag(L)))))
    # purposes offset so estimator draws never alias simulation draws
    base = 16

    if convention == "real":
        A, F, B = _real_part(A, "A"), _real_part(F, "F"), _real_part(policy.B, "B")
        G, C = _real_part(policy.G, "G"), _real_part(policy.C_factor, "C_factor")
        L = _real_part(L, "K_eta")
        const = 0.5 * (N * math.log(sigma_b2) - logdet_eta)
    else:
        B = policy.B
        const = N * math.log(sigma_b2) - logdet_eta

    count, mean, m2 = 0, 0.0, 0.0
    for block, start in enumerate(range(0, samples, batch)):
        T = min(batch, samples - start)
        rng = {s: substream(seed, base + s, block) for s in Stream}
        if convention == "real":
            x = _real_draws(scenario.signaling, scenario.mx, mn, rng[Stream.WORD], T)
            z = x @ F.T + math.sqrt(policy.sigma_e2) * rng[Stream.EVE_NOISE].standard_normal((T, N))
            v = z @ G.T + rng[Stream.ATTACK_NOISE].standard_normal((T, C.shape[1])) @ C.T
            v = v + math.sqrt(policy.sigma_bt2) * rng[Stream.ATTACK_RX_NOISE].standard_normal((T, N))
            e1 = v - x @ B.T
            e0 = v - x @ A.T
            q1 = np.sum(solve_triangular(L, e1.T, lower=True) ** 2, axis=0)
            q0 = np.sum(e0**2, axis=1) / sigma_b2
            llr = const - 0.5 * q1 + 0.5 * q0
        else:
            x = draw_words(scenario.signaling, scenario.mx, mn, rng[Stream.WORD], T)
            z = x @ F.T + draw_noise(N, policy.sigma_e2, rng[Stream.EVE_NOISE], T)
            v = sample_attack(policy, z, rng[Stream.ATTACK_NOISE], rng[Stream.ATTACK_RX_NOISE])
            e1 = v - x @ B.T
            e0 = v - x @ A.T
            w = solve_triangular(L, e1.T, lower=True)
            q1 = np.sum(np.abs(w) ** 2, axis=0) / 2.0
            q0 = np.sum(np.abs(e0) ** 2, axis=1) / (2.0 * sigma_b2)
            llr = const - q1 + q0
        # Chan et al. pairwise merge of (count, mean, M2)
        b_mean = float(np.mean(llr))
        b_m2 = float(np.sum((llr - b_mean) ** 2))
        delta = b_mean - mean
        total = count + T
        mean += delta * T / total
        m2 += b_m2 + delta**2 * count * T / total
        count = total
    var = m2 / (count - 1) if count > 1 else math.nan
    return KLEstimate(estimate=mean, stderr=math.sqrt(var / count), samples=count)
