import numpy as np
import pytest
from scipy.linalg import null_space as scipy_null_space

from optspoof import Scenario, build_delay_channel, channels_for, kernel_condition
from optspoof._validation import ValidationError
from optspoof.channel import null_space


def test_two_sv_example():
    ch = build_delay_channel([0, 1], n=2)
    expected = np.array([[1, 0, 0, 0],
                         [0, 1, 1, 0],
                         [0, 0, 0, 1]], dtype=float)
    np.testing.assert_array_equal(ch.matrix, expected)
    assert ch.shape == (3, 4)
    assert ch.delta == 1


def test_padding_and_blocks():
    ch = build_delay_channel([2, 0, 1], n=3, rows=7)
    M = ch.matrix
    assert M.shape == (7, 9)
    assert np.all(M.sum(axis=0) == 1)
    for blk, tau in zip(ch.blocks, (2, 0, 1)):
        np.testing.assert_array_equal(blk[tau:tau + 3], np.eye(3))
    with pytest.raises(ValidationError):
        build_delay_channel([0, 4], n=3, rows=6)


def test_apply_matches_matrix(rng):
    ch = build_delay_channel([0, 5, 2, 7], n=11, rows=20)
    X = rng.standard_normal((6, 44)) + 1j * rng.standard_normal((6, 44))
    np.testing.assert_allclose(ch.apply(X), X @ ch.matrix.T, atol=1e-12)
    np.testing.assert_allclose(ch.apply(X[0]), ch.matrix @ X[0], atol=1e-12)


def test_channels_share_padded_length():
    s = Scenario(m=2, n=4, mx=1.0, sigma_b2=1.0, sigma_bt2=0.2, sigma_e2=0.5,
                 tau_bob=[0, 6], tau_eve=[0, 2], tau_forged=[1, 0])
    A, F = channels_for(s)
    assert A.shape == F.shape == (10, 8)
    assert A.delays == (1, 0)


def test_null_space_against_scipy(rng):
    for _ in range(10):
        m, n = int(rng.integers(1, 5)), int(rng.integers(1, 8))
        ch = build_delay_channel(rng.integers(0, 6, size=m), n)
        ours = null_space(ch)
        ref = scipy_null_space(ch.matrix)
        assert ours.shape[1] == ref.shape[1]
        # same subspace: projectors agree
        np.testing.assert_allclose(ours @ ours.T, ref @ ref.T, atol=1e-10)


def test_kernel_condition():
    A = build_delay_channel([0, 1], n=3, rows=5).matrix
    assert kernel_condition(A, A) is False
    F = build_delay_channel([0, 2], n=3, rows=5).matrix
    # ker(A) is 2-D but ker(F) only 1-D, so containment is impossible
    assert scipy_null_space(A).shape[1] == 2 and scipy_null_space(F).shape[1] == 1
    assert kernel_condition(A, F) is True
    # general oracle: some kernel vector of the first matrix survives the second
    for X, Y in ((A, F), (F, A), (A, A)):
        Nx = scipy_null_space(X)
        assert kernel_condition(X, Y) == bool(np.linalg.norm(Y @ Nx) > 1e-8)
    # single SV: A has full column rank, kernel is trivial
    one = build_delay_channel([0], n=3).matrix
    assert kernel_condition(one, one) is False
