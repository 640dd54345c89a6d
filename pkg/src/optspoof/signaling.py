"""Transmitted words, receiver noise and the counter-based RNG substreams."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive
from .scenario import Scenario, Signaling


class Stream(enum.IntEnum):
    """Independent random sources of one simulation; each gets its own substream."""

    WORD = 0
    BOB_NOISE = 1
    EVE_NOISE = 2
    ATTACK_NOISE = 3
    ATTACK_RX_NOISE = 4


def substream(seed: int, purpose: int, block: int = 0) -> np.random.Generator:
    """Philox generator keyed by ``(seed, purpose, block)``.

    The key, not the call order, fixes the draws, so a block of trials can be
    regenerated in isolation or on another thread with identical results.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(purpose), int(block)))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class Word:
    samples: np.ndarray
    scheme: Signaling
    power: float


def draw_words(scheme, mx: float, dim: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw i.i.d. symbols with ``E[|x_i|^2] = mx``.

    Gaussian symbols are circularly symmetric (real and imaginary variance
    ``mx / 2``); BPSK symbols are ``+-sqrt(mx)`` on the real axis.
    """
    scheme = Signaling(scheme)
    mx = check_positive(mx, "mx")
    shape = (dim,) if size is None else (size, dim)
    if scheme is Signaling.BPSK:
        bits = rng.integers(0, 2, size=shape)
        return (2.0 * bits - 1.0).astype(np.complex128) * np.sqrt(mx)
    return draw_noise(dim, mx / 2.0, rng, size)


def draw_word(scenario: Scenario, rng: np.random.Generator) -> Word:
    """One transmitted word of length ``m*n`` (SV segments are independent)."""
    x = draw_words(scenario.signaling, scenario.mx, scenario.m * scenario.n, rng)
    return Word(samples=x, scheme=scenario.signaling, power=scenario.mx)


def draw_noise(dim: int, variance: float, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Circular complex Gaussian noise, ``variance`` per real component."""
    variance = check_positive(variance, "variance")
    shape = (dim,) if size is None else (size, dim)
    z = rng.standard_normal(shape + (2,))
    return np.sqrt(variance) * (z[..., 0] + 1j * z[..., 1])
