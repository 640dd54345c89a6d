"""Linear-Gaussian spoofing attacks and the KL-optimal attack synthesis.

An attack maps Eve's observation ``z`` to ``v = G z + C w_c + w_b`` where
``w_c`` and ``w_b`` are independent circular complex Gaussian vectors. As for
the receiver noise, ``C C^H`` is the per-real-component covariance, i.e.
``w_c`` has unit variance per real component.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import ValidationError, check_matrix, check_positive, check_signals
from .channel import DelayChannel
from .linalg import PINV_RCOND, PSD_RTOL, hermitian_pinv, psd_factor, rows_times
from .scenario import Scenario
from .signaling import draw_noise

FEASIBILITY_RTOL = 1e-10


def _as_matrix(M, name):
    if isinstance(M, DelayChannel):
        return M.matrix
    return check_matrix(M, name)


@dataclass(frozen=True)
class AttackPolicy:
    """A class-C attack together with the quantities the analytics need.

    Attributes
    ----------
    G : ndarray, shape (N, N)
        Linear map applied to Eve's observation.
    C_factor : ndarray, shape (N, r)
        Factor of the shaping covariance ``C C^H``.
    sigma_bt2, sigma_e2 : float
        Per-component noise variance at Bob under attack and at Eve.
    B : ndarray, shape (N, m*n)
        Equivalent forged channel ``G F``.
    K_eta : ndarray, shape (N, N)
        Covariance of the total attack noise ``sigma_e2 G G^H + C C^H + sigma_bt2 I``.
    """

    G: np.ndarray
    C_factor: np.ndarray
    sigma_bt2: float
    sigma_e2: float
    B: np.ndarray
    K_eta: np.ndarray

    @classmethod
    def from_matrices(cls, G, C_factor, F, sigma_e2: float, sigma_bt2: float) -> "AttackPolicy":
        G = check_matrix(G, "G", square=True)
        F = _as_matrix(F, "F")
        C_factor = check_matrix(C_factor, "C_factor") if np.size(C_factor) else np.zeros((G.shape[0], 0))
        if F.shape[0] != G.shape[1] or C_factor.shape[0] != G.shape[0]:
            raise ValidationError("G", "G, C_factor and F dimensions do not agree")
        sigma_e2 = check_positive(sigma_e2, "sigma_e2")
        sigma_bt2 = check_positive(sigma_bt2, "sigma_bt2")
        N = G.shape[0]
        K_eta = sigma_e2 * (G @ G.conj().T) + C_factor @ C_factor.conj().T + sigma_bt2 * np.eye(N)
        K_eta = (K_eta + K_eta.conj().T) / 2
        return cls(G=G, C_factor=C_factor, sigma_bt2=sigma_bt2, sigma_e2=sigma_e2, B=G @ F, K_eta=K_eta)

    @property
    def dim(self) -> int:
        return self.G.shape[0]

    @property
    def cov_attack(self) -> np.ndarray:
        """The shaping covariance ``C C^H``."""
        return self.C_factor @ self.C_factor.conj().T


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    margin: float
    lambda_max: float


def optimal_attack(A, F, mx: float, sigma_b2: float, sigma_e2: float, sigma_bt2: float,
                   rcond: float = PINV_RCOND) -> tuple[AttackPolicy, FeasibilityReport]:
    """Closed-form KL-minimizing attack for ``K_x = mx I``.

    ``G = A Kx F^H (F Kx F^H)^+`` and
    ``C C^H = K_B - K_E A Kx F^H [(F Kx F^H)^+]^2 F Kx A^H - K_B~``.
    When the shaping covariance is indefinite its negative modes are clipped
    and the report says ``feasible=False``; the returned policy then no
    longer matches Bob's noise covariance.
    """
    A = _as_matrix(A, "A")
    F = _as_matrix(F, "F")
    if A.shape != F.shape:
        raise ValidationError("F", f"A {A.shape} and F {F.shape} must share the padded shape")
    mx = check_positive(mx, "mx")
    sigma_b2 = check_positive(sigma_b2, "sigma_b2")
    sigma_e2 = check_positive(sigma_e2, "sigma_e2")
    sigma_bt2 = check_positive(sigma_bt2, "sigma_bt2")

    N = A.shape[0]
    AKF = mx * (A @ F.conj().T)
    FKF = mx * (F @ F.conj().T)
    pinv, pinv_sq = hermitian_pinv(FKF, rcond)
    G = AKF @ pinv
    Q = AKF @ pinv_sq @ AKF.conj().T
    Q = (Q + Q.conj().T) / 2

    lambda_max = float(np.linalg.eigvalsh(Q)[-1]) if N else 0.0
    headroom = sigma_b2 - sigma_bt2
    margin = headroom - sigma_e2 * lambda_max
    tol = FEASIBILITY_RTOL * max(abs(headroom), sigma_e2 * abs(lambda_max), np.finfo(float).tiny)

    cov = headroom * np.eye(N) - sigma_e2 * Q
    C_factor, _, _ = psd_factor(cov, PSD_RTOL)
    policy = AttackPolicy.from_matrices(G, C_factor, F, sigma_e2, sigma_bt2)
    return policy, FeasibilityReport(feasible=bool(margin >= -tol), margin=float(margin),
                                     lambda_max=lambda_max)


def synthesize_optimal(A, F, scenario: Scenario) -> tuple[AttackPolicy, FeasibilityReport]:
    """Optimal attack for the noise levels and power of ``scenario``."""
    return optimal_attack(A, F, scenario.mx, scenario.sigma_b2, scenario.sigma_e2, scenario.sigma_bt2)


def sample_attack(policy: AttackPolicy, z, rng_c: np.random.Generator,
                  rng_b: np.random.Generator | None = None) -> np.ndarray:
    """Spoofed observation ``v = G z + C w_c + w_b`` for one or many ``z`` rows.

    ``rng_b=None`` disables the receiver noise ``w_b`` (noise-free limit).
    """
    z = np.asarray(z)
    single = z.ndim == 1
    Z = check_signals(z, policy.G.shape[1], "z")
    T = Z.shape[0]
    V = rows_times(Z, policy.G)
    r = policy.C_factor.shape[1]
    if r:
        V = V + rows_times(draw_noise(r, 1.0, rng_c, T), policy.C_factor)
    if rng_b is not None:
        V = V + draw_noise(policy.dim, policy.sigma_bt2, rng_b, T)
    return V[0] if single else V


def random_class_c_policy(base: AttackPolicy, F, rng: np.random.Generator, scale: float = 0.1) -> AttackPolicy:
    """Perturb ``base`` in (G, C) to get another member of the attack class."""
    G, C = base.G, base.C_factor
    N = G.shape[0]
    if C.shape[1] < N:
        C = np.hstack([C, np.zeros((N, N - C.shape[1]))])
    g_scale = scale * max(np.abs(G).max(initial=0.0), 1.0)
    c_scale = scale * max(np.abs(C).max(initial=0.0), np.sqrt(base.sigma_bt2))
    G2 = G + g_scale * rng.standard_normal(G.shape)
    C2 = C + c_scale * rng.standard_normal(C.shape)
    return AttackPolicy.from_matrices(G2, C2, F, base.sigma_e2, base.sigma_bt2)


class LimitingScenario(str, enum.Enum):
    S1_MEACONING = "S1_meaconing"
    S2_SINGLE_SV = "S2_single_sv"
    S3_DEGRADED = "S3_degraded"
    GENERAL = "general"


def limiting_scenario_classify(A, F, scenario: Scenario, tol: float = 1e-9) -> LimitingScenario:
    """Classify the geometry into the undetectable limiting cases, if any."""
    A_ = _as_matrix(A, "A")
    F_ = _as_matrix(F, "F")
    if scenario.m == 1:
        return LimitingScenario.S2_SINGLE_SV
    if A_.shape == F_.shape and np.array_equal(A_, F_):
        return LimitingScenario.S1_MEACONING
    policy, report = synthesize_optimal(A_, F_, scenario)
    K_B = scenario.sigma_b2 * np.eye(A_.shape[0])
    same_mean = np.linalg.norm(policy.B - A_) <= tol * max(np.linalg.norm(A_), 1.0)
    same_cov = np.linalg.norm(policy.K_eta - K_B) <= tol * np.linalg.norm(K_B)
    if report.feasible and same_mean and same_cov:
        return LimitingScenario.S3_DEGRADED
    return LimitingScenario.GENERAL


class OptimalSpoofer(TransformerMixin, BaseEstimator):
    """scikit-learn style wrapper around the optimal attack.

    ``fit(F, A)`` learns the map from Eve's channel ``F`` to the target
    channel ``A``; ``transform(Z)`` turns rows of Eve observations into
    spoofed signals.

    Parameters
    ----------
    mx : float
        Per-sample transmit power; ``K_x = mx I``.
    sigma_b2, sigma_e2, sigma_bt2 : float
        Per-component noise variances at Bob (nominal), Eve, Bob under attack.
    rcond : float
        Relative eigenvalue cutoff of the pseudoinverse.
    random_state : int, Generator or None
        Source of the attack noise drawn by ``transform``.
    """

    def __init__(self, mx=1.0, sigma_b2=1.0, sigma_e2=0.5, sigma_bt2=0.25,
                 rcond=PINV_RCOND, random_state=None):
        self.mx = mx
        self.sigma_b2 = sigma_b2
        self.sigma_e2 = sigma_e2
        self.sigma_bt2 = sigma_bt2
        self.rcond = rcond
        self.random_state = random_state

    def fit(self, F, A):
        self.policy_, self.feasibility_ = optimal_attack(
            A, F, self.mx, self.sigma_b2, self.sigma_e2, self.sigma_bt2, self.rcond
        )
        self.G_ = self.policy_.G
        self.C_factor_ = self.policy_.C_factor
        self.B_ = self.policy_.B
        self.n_features_in_ = self.G_.shape[1]
        return self

    def transform(self, Z):
        check_is_fitted(self, "policy_")
        rng = np.random.default_rng(self.random_state)
        rng_c, rng_b = rng.spawn(2)
        return sample_attack(self.policy_, check_signals(Z, self.n_features_in_, "Z"), rng_c, rng_b)
