import numpy as np
import pytest
from sklearn.base import clone

from conftest import random_scenario
from optspoof import (
    LimitingScenario,
    OptimalSpoofer,
    Scenario,
    channels_for,
    limiting_scenario_classify,
    optimal_attack,
    policy_divergence,
    random_class_c_policy,
    sample_attack,
    substream,
    synthesize_optimal,
)
from optspoof._validation import ValidationError


def test_identity_example():
    I = np.eye(2)
    pol, rep = optimal_attack(I, I, 1.0, 1.0, 0.5, 0.25)
    np.testing.assert_allclose(pol.G, I, atol=1e-14)
    np.testing.assert_allclose(pol.cov_attack, 0.25 * I, atol=1e-14)
    assert rep.feasible and rep.margin == pytest.approx(0.25) and rep.lambda_max == pytest.approx(1.0)


def test_identity_infeasible_example():
    I = np.eye(2)
    pol, rep = optimal_attack(I, I, 1.0, 1.0, 1.0, 0.25)
    assert not rep.feasible
    assert rep.margin == pytest.approx(-0.25)
    # negative modes clipped, so the shaping covariance is zero
    np.testing.assert_allclose(pol.cov_attack, 0.0, atol=1e-14)


def test_dimension_mismatch():
    with pytest.raises(ValidationError):
        optimal_attack(np.eye(3), np.eye(2), 1.0, 1.0, 0.5, 0.25)


def _svd_oracle(A, F, mx, sigma_b2, sigma_e2, sigma_bt2):
    # textbook route via numpy's SVD-based pinv, independent of the eigh path
    Kx = mx * np.eye(A.shape[1])
    P = np.linalg.pinv(F @ Kx @ F.T, rcond=1e-12, hermitian=False)
    G = A @ Kx @ F.T @ P
    CC = (sigma_b2 - sigma_bt2) * np.eye(A.shape[0]) - sigma_e2 * A @ Kx @ F.T @ P @ P @ F @ Kx @ A.T
    return G, CC


def test_against_svd_oracle(rng):
    for _ in range(25):
        s = random_scenario(rng, n_range=(2, 12))
        A, F = channels_for(s)
        pol, rep = synthesize_optimal(A, F, s)
        G, CC = _svd_oracle(A.matrix, F.matrix, s.mx, s.sigma_b2, s.sigma_e2, s.sigma_bt2)
        scale = np.linalg.norm(G)
        assert np.linalg.norm(pol.G - G) <= 1e-9 * scale
        assert np.linalg.norm(pol.cov_attack - CC) <= 1e-9 * np.linalg.norm(CC)
        assert rep.feasible
        assert rep.lambda_max == pytest.approx(np.linalg.eigvalsh(G @ G.T)[-1], rel=1e-9)


def test_noise_covariance_matched(rng):
    for _ in range(50):
        s = random_scenario(rng)
        A, F = channels_for(s)
        pol, _ = synthesize_optimal(A, F, s)
        K_B = s.sigma_b2 * np.eye(A.shape[0])
        assert np.linalg.norm(pol.K_eta - K_B) <= 1e-8 * np.linalg.norm(K_B)


def test_forged_channel_is_row_projection(rng):
    for _ in range(10):
        s = random_scenario(rng)
        A, F = channels_for(s)
        pol, _ = synthesize_optimal(A, F, s)
        Fm = F.matrix
        proj = np.linalg.pinv(Fm) @ Fm
        np.testing.assert_allclose(pol.B, A.matrix @ proj, atol=1e-9)


def test_optimal_beats_perturbations(rng):
    s = random_scenario(rng, m_range=(3, 4), n_range=(4, 8))
    A, F = channels_for(s)
    pol, _ = synthesize_optimal(A, F, s)
    best = policy_divergence(A.matrix, pol, s).f_exact
    gen = substream(99, 0)
    for scale in np.geomspace(1e-3, 0.5, 120):
        other = random_class_c_policy(pol, F, gen, scale=scale)
        assert policy_divergence(A.matrix, other, s).f_exact >= best - 1e-10


def test_sample_attack_covariance():
    s = Scenario(m=2, n=3, mx=1.0, sigma_b2=2.0, sigma_bt2=0.3, sigma_e2=0.8,
                 tau_bob=[0, 0], tau_eve=[0, 1], tau_forged=[0, 2], seed=4)
    A, F = channels_for(s)
    pol, rep = synthesize_optimal(A, F, s)
    assert rep.feasible
    T = 200_000
    z = np.sqrt(s.sigma_e2) * (substream(1, 0).standard_normal((T, A.shape[0]))
                               + 1j * substream(1, 1).standard_normal((T, A.shape[0])))
    v = sample_attack(pol, z, substream(1, 2), substream(1, 3))
    # total attack noise per real component; its empirical covariance is K_eta
    emp = (v.conj().T @ v).real / (2 * T)
    assert np.linalg.norm(emp - pol.K_eta) <= 0.03 * np.linalg.norm(pol.K_eta)
    single = sample_attack(pol, z[0], substream(1, 2), substream(1, 3))
    np.testing.assert_allclose(single, v[0])


def test_limiting_classification():
    base = dict(mx=1.0, sigma_b2=1.0, sigma_bt2=0.1, sigma_e2=0.3, seed=0)
    s1 = Scenario(m=3, n=6, tau_bob=[0, 1, 2], tau_eve=[0, 4, 2], tau_forged=[0, 4, 2], **base)
    s2 = Scenario(m=1, n=6, tau_bob=[0], tau_eve=[0], tau_forged=[0], **base)
    gen = Scenario(m=3, n=6, tau_bob=[0, 1, 2], tau_eve=[0, 3, 1], tau_forged=[0, 4, 2], **base)
    for s, want in ((s1, LimitingScenario.S1_MEACONING), (s2, LimitingScenario.S2_SINGLE_SV),
                    (gen, LimitingScenario.GENERAL)):
        A, F = channels_for(s)
        assert limiting_scenario_classify(A, F, s) is want
    # disjoint windows decouple into single-SV problems: shifts are free
    wide = Scenario(m=2, n=4, tau_bob=[0, 0], tau_eve=[0, 9], tau_forged=[0, 12], **base)
    A, F = channels_for(wide)
    assert limiting_scenario_classify(A, F, wide) is LimitingScenario.S3_DEGRADED


def test_spoofer_estimator_api(rng):
    s = random_scenario(rng, n_range=(3, 6))
    A, F = channels_for(s)
    est = OptimalSpoofer(mx=s.mx, sigma_b2=s.sigma_b2, sigma_e2=s.sigma_e2,
                         sigma_bt2=s.sigma_bt2, random_state=3)
    params = est.get_params()
    assert params["sigma_b2"] == s.sigma_b2
    assert clone(est).get_params() == params
    est.fit(F.matrix, A.matrix)
    pol, _ = synthesize_optimal(A, F, s)
    np.testing.assert_allclose(est.G_, pol.G)
    Z = rng.standard_normal((5, A.shape[0]))
    out1, out2 = est.transform(Z), est.transform(Z)
    assert out1.shape == (5, A.shape[0])
    np.testing.assert_array_equal(out1, out2)
    with pytest.raises(ValidationError):
        est.transform(np.ones((2, A.shape[0] + 1)))
