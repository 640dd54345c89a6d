"""LRT / GLRT spoofing detectors and Monte-Carlo DET estimation."""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.stats import norm
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import ValidationError, check_hermitian, check_positive, check_signals
from .attack import AttackPolicy, _as_matrix, sample_attack, synthesize_optimal
from .channel import channels_for
from .divergence import DivergenceReport, bound_curve, h_function, policy_divergence
from .linalg import rows_times
from .scenario import Scenario
from .signaling import Stream, draw_noise, draw_words, substream

COND_LIMIT = 1e12
DIAG_LOADING = 1e-12
# |L'| below this fraction of its two quadratic forms is floating-point cancellation
CANCELLATION_RTOL = 1e-12
BLOCK_SIZE = 512
Z95 = float(norm.ppf(0.975))


class Detector(str, enum.Enum):
    LRT = "lrt"
    GLRT = "glrt"


def _inverse_factor(K, loading: bool = True):
    K = check_hermitian(K, "K")
    N = K.shape[0]
    if np.linalg.cond(K) > COND_LIMIT:
        if not loading:
            raise ValidationError("K", "covariance is singular and diagonal loading is disabled")
        K = K + DIAG_LOADING * np.trace(K).real / N * np.eye(N)
    return cho_factor(K, lower=True)


def _quadratic(e: np.ndarray, factor) -> np.ndarray:
    """Row-wise ``e^H K^{-1} e`` for ``e`` of shape (T, N)."""
    sol = cho_solve(factor, e.T)
    return np.einsum("ij,ji->i", e.conj(), sol).real


def _residual(R, X, M):
    return R - rows_times(X, M)


def lrt_statistic(r, x, A, B, K_B, K_eta, *, loading: bool = True):
    """``(r - Ax)^H K_B^-1 (r - Ax) - (r - Bx)^H K_eta^-1 (r - Bx)``.

    Vectorized over rows of ``r`` and ``x``; returns a scalar for 1-D input.
    Large values favour the spoofing hypothesis.
    """
    A = _as_matrix(A, "A")
    B = _as_matrix(B, "B")
    single = np.ndim(r) == 1
    R = check_signals(r, A.shape[0], "r")
    X = check_signals(x, A.shape[1], "x")
    stat = _lrt(R, X, A, B, _inverse_factor(K_B, loading), _inverse_factor(K_eta, loading))
    return float(stat[0]) if single else stat


def _lrt(R, X, A, B, factor_b, factor_eta):
    q0 = _quadratic(_residual(R, X, A), factor_b)
    q1 = _quadratic(_residual(R, X, B), factor_eta)
    stat = q0 - q1
    stat[np.abs(stat) <= CANCELLATION_RTOL * (np.abs(q0) + np.abs(q1))] = 0.0
    return stat


def glrt_statistic(r, x, A, K_B):
    """``(r - Ax)^H K_B^-1 (r - Ax)``: distance from the legitimate model only."""
    A = _as_matrix(A, "A")
    single = np.ndim(r) == 1
    R = check_signals(r, A.shape[0], "r")
    X = check_signals(x, A.shape[1], "x")
    stat = _quadratic(_residual(R, X, A), _inverse_factor(K_B))
    return float(stat[0]) if single else stat


class _ThresholdDetector(ClassifierMixin, BaseEstimator):
    """Shared predict/score logic: decide spoofed (1) when statistic > threshold."""

    def predict(self, R, X):
        return (self.decision_function(R, X) > self.threshold).astype(int)

    def score(self, R, X, y):
        return float(np.mean(self.predict(R, X) == np.asarray(y)))


class LRTDetector(_ThresholdDetector):
    """Neyman-Pearson test for a known linear-Gaussian attack.

    Parameters
    ----------
    sigma_b2 : float
        Per-component noise variance at Bob.
    threshold : float
        Decision threshold on the statistic.
    """

    def __init__(self, sigma_b2=1.0, threshold=0.0):
        self.sigma_b2 = sigma_b2
        self.threshold = threshold

    def fit(self, A, policy: AttackPolicy):
        A = _as_matrix(A, "A")
        check_positive(self.sigma_b2, "sigma_b2")
        self.A_ = A
        self.B_ = policy.B
        self.K_B_ = self.sigma_b2 * np.eye(A.shape[0])
        self.K_eta_ = policy.K_eta
        self._factors = (_inverse_factor(self.K_B_), _inverse_factor(self.K_eta_))
        self.classes_ = np.array([0, 1])
        return self

    def decision_function(self, R, X):
        check_is_fitted(self, "A_")
        R = check_signals(R, self.A_.shape[0], "R")
        X = check_signals(X, self.A_.shape[1], "X")
        return _lrt(R, X, self.A_, self.B_, *self._factors)


class GLRTDetector(_ThresholdDetector):
    """Test that only knows the legitimate channel and noise level."""

    def __init__(self, sigma_b2=1.0, threshold=0.0):
        self.sigma_b2 = sigma_b2
        self.threshold = threshold

    def fit(self, A, policy=None):
        A = _as_matrix(A, "A")
        check_positive(self.sigma_b2, "sigma_b2")
        self.A_ = A
        self.K_B_ = self.sigma_b2 * np.eye(A.shape[0])
        self._factor = _inverse_factor(self.K_B_)
        self.classes_ = np.array([0, 1])
        return self

    def decision_function(self, R, X):
        check_is_fitted(self, "A_")
        R = check_signals(R, self.A_.shape[0], "R")
        X = check_signals(X, self.A_.shape[1], "X")
        return _quadratic(_residual(R, X, self.A_), self._factor)


def make_detector(kind, scenario: Scenario, A, policy: AttackPolicy):
    kind = Detector(kind)
    cls = LRTDetector if kind is Detector.LRT else GLRTDetector
    return cls(sigma_b2=scenario.sigma_b2).fit(A, policy)


def wilson_interval(successes, trials: int, z: float = Z95) -> np.ndarray:
    """Wilson score interval(s); returns shape ``(..., 2)``."""
    k = np.asarray(successes, dtype=float)
    p = k / trials
    denom = 1 + z**2 / trials
    centre = (p + z**2 / (2 * trials)) / denom
    half = z * np.sqrt(p * (1 - p) / trials + z**2 / (4 * trials**2)) / denom
    lo = np.where(k <= 0, 0.0, np.clip(centre - half, 0, 1))
    hi = np.where(k >= trials, 1.0, np.clip(centre + half, 0, 1))
    return np.stack([lo, hi], axis=-1)


@dataclass
class DetCurve:
    """Empirical (alpha, beta) operating points over a threshold sweep.

    ``alpha`` is the false-alarm rate ``P(stat > theta | H0)`` and ``beta`` the
    miss rate ``P(stat <= theta | H1)``. ``bound`` holds ``(alpha, beta_min)``
    rows of the divergence bound.
    """

    thresholds: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    ci_alpha: np.ndarray
    ci_beta: np.ndarray
    trials: int
    detector: Detector
    divergence: float = float("nan")
    bound: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def points(self) -> list[tuple]:
        return list(zip(self.thresholds, self.alpha, self.beta,
                        map(tuple, self.ci_alpha), map(tuple, self.ci_beta)))

    def beta_at(self, alphas) -> tuple[np.ndarray, np.ndarray]:
        """Miss rate and its Wilson CI at the operating point reached at each ``alpha``.

        Uses the smallest threshold whose false-alarm rate does not exceed
        the requested ``alpha``.
        """
        alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
        # alpha is non-increasing along the threshold sweep
        idx = np.searchsorted(-self.alpha, -alphas, side="left")
        idx = np.clip(idx, 0, len(self.alpha) - 1)
        return self.beta[idx], self.ci_beta[idx]

    def bound_violations(self, slack: float = 3.0) -> np.ndarray:
        """Indices of points with ``h(beta, alpha) > D`` even after moving
        ``slack`` Wilson half-widths toward the chance line."""
        hw_a = self.ci_alpha[:, 1] - self.alpha
        hw_b = self.ci_beta[:, 1] - self.beta
        a = np.clip(self.alpha + slack * hw_a, 0, 1)
        b = np.clip(self.beta + slack * hw_b, 0, 1)
        h = np.where(a + b >= 1, 0.0, h_function(b, a))
        return np.flatnonzero(h > self.divergence)

    def rows(self) -> list[dict]:
        base = {k: self.meta.get(k, "") for k in ("n", "m", "snr_sb_db", "snr_se_db")}
        return [
            {
                "detector": self.detector.value,
                **base,
                "theta": t,
                "alpha": a,
                "beta": b,
                "ci_alpha": f"{ca[0]:.6g};{ca[1]:.6g}",
                "ci_beta": f"{cb[0]:.6g};{cb[1]:.6g}",
                "d_forward": self.meta.get("d_forward", self.divergence),
            }
            for t, a, b, ca, cb in zip(self.thresholds, self.alpha, self.beta,
                                       self.ci_alpha, self.ci_beta)
        ]


def det_from_statistics(s0, s1, thresholds=None, detector=Detector.LRT) -> DetCurve:
    """DET points from H0 and H1 statistics.

    ``thresholds=None`` sweeps every distinct pooled statistic value (plus
    ``-inf``), which is exact: any threshold strictly between two sorted
    values gives the same counts as the lower one.
    """
    s0 = np.sort(np.asarray(s0, dtype=float))
    s1 = np.sort(np.asarray(s1, dtype=float))
    if s0.size != s1.size:
        raise ValidationError("s1", "H0 and H1 need the same number of trials")
    n = s0.size
    if thresholds is None:
        thresholds = np.concatenate([[-np.inf], np.unique(np.concatenate([s0, s1]))])
    thresholds = np.asarray(thresholds, dtype=float)
    false_alarms = n - np.searchsorted(s0, thresholds, side="right")
    misses = np.searchsorted(s1, thresholds, side="right")
    return DetCurve(
        thresholds=thresholds,
        alpha=false_alarms / n,
        beta=misses / n,
        ci_alpha=wilson_interval(false_alarms, n),
        ci_beta=wilson_interval(misses, n),
        trials=n,
        detector=Detector(detector),
    )


def quantile_thresholds(s0, s1, count: int = 200) -> np.ndarray:
    """``count`` thresholds at log-spaced tail quantiles of the pooled statistics."""
    pooled = np.concatenate([np.asarray(s0), np.asarray(s1)])
    half = np.logspace(-4, np.log10(0.5), count // 2)
    q = np.unique(np.concatenate([half, 1 - half]))
    return np.quantile(pooled, q)


def _simulate_block(scenario, A, F, policy, detector, block, size):
    seed = scenario.seed
    mn, N = scenario.m * scenario.n, scenario.padded_length
    x = draw_words(scenario.signaling, scenario.mx, mn, substream(seed, Stream.WORD, block), size)
    r0 = A.apply(x) + draw_noise(N, scenario.sigma_b2, substream(seed, Stream.BOB_NOISE, block), size)
    z = F.apply(x) + draw_noise(N, scenario.sigma_e2, substream(seed, Stream.EVE_NOISE, block), size)
    r1 = sample_attack(policy, z, substream(seed, Stream.ATTACK_NOISE, block),
                       substream(seed, Stream.ATTACK_RX_NOISE, block))
    return detector.decision_function(r0, x), detector.decision_function(r1, x)


def simulate_statistics(scenario: Scenario, detector, policy: AttackPolicy | None = None,
                        trials: int | None = None, threads: int = 1,
                        block_size: int = BLOCK_SIZE) -> tuple[np.ndarray, np.ndarray]:
    """Detector statistics for matched H0/H1 trials.

    Each trial draws one word ``x``. Under H0 Bob sees ``A x + w_B``; under
    H1 Eve observes ``F x + w_E`` and Bob sees only her spoofed signal. Trial
    blocks own their RNG substreams, so ``threads`` does not change results.
    """
    A, F = channels_for(scenario)
    if policy is None:
        policy, _ = synthesize_optimal(A, F, scenario)
    if isinstance(detector, (str, Detector)):
        detector = make_detector(detector, scenario, A, policy)
    trials = scenario.trials if trials is None else trials
    starts = list(range(0, trials, block_size))
    jobs = [(b, min(block_size, trials - s)) for b, s in enumerate(starts)]

    def run(job):
        return _simulate_block(scenario, A, F, policy, detector, *job)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(job) for job in jobs]
    s0 = np.concatenate([p[0] for p in parts])
    s1 = np.concatenate([p[1] for p in parts])
    return s0, s1


def estimate_det(scenario: Scenario, detector="lrt", policy: AttackPolicy | None = None,
                 thresholds="auto", trials: int | None = None, threads: int = 1,
                 bound_alphas=None) -> tuple[DetCurve, DivergenceReport]:
    """Monte-Carlo DET curve and the divergence bound for ``scenario``.

    Parameters
    ----------
    thresholds : "auto", "quantile" or array_like
        ``"auto"`` sweeps every distinct statistic; ``"quantile"`` uses 200
        log-spaced tail quantiles (plot resolution).
    """
    A, F = channels_for(scenario)
    if policy is None:
        policy, _ = synthesize_optimal(A, F, scenario)
    report = policy_divergence(A.matrix, policy, scenario)
    s0, s1 = simulate_statistics(scenario, detector, policy, trials, threads)
    if isinstance(thresholds, str):
        if thresholds == "auto":
            grid = None
        elif thresholds == "quantile":
            grid = quantile_thresholds(s0, s1)
        else:
            raise ValidationError("thresholds", f"unknown threshold mode {thresholds!r}")
    else:
        grid = thresholds
    curve = det_from_statistics(s0, s1, grid, detector=detector)
    curve.divergence = report.f_exact
    if bound_alphas is None:
        bound_alphas = np.logspace(-4, 0, 200)
    curve.bound = bound_curve(report.f_exact, bound_alphas)
    curve.meta.update(n=scenario.n, m=scenario.m,
                      snr_sb_db=round(scenario.snr_sb_db, 6), snr_se_db=round(scenario.snr_se_db, 6),
                      signaling=scenario.signaling.value, d_forward=report.f_forward)
    return curve, report
