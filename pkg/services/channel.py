"""
Tapped-delay-line multipath with AWGN at complex baseband.

Randomness: numpy's PCG64 bit generator seeded through SeedSequence, Gaussian
samples from numpy's ziggurat standard normal. Per-trial seeds come from
`derive_seed(base_seed, *keys)` so every trial is reproducible on its own.
"""
from __future__ import annotations

import logging
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.linalg import toeplitz

from models.channel import ChannelModel, NoiseSpec, parse_tap
from models.sweep import ChannelSpec, SnrAxis
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

CHANNEL_PROFILES = ("identity", "fixed", "exp-rayleigh")


# -----------------------------------------------------------------------------
# Random Numbers
# -----------------------------------------------------------------------------
def derive_seed(base_seed: int, *keys: int) -> int:
    """Deterministic 63-bit seed for (base_seed, keys...), e.g. (seed, point, trial)"""
    seq = np.random.SeedSequence(entropy=base_seed, spawn_key=tuple(int(k) for k in keys))
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def complex_awgn(n: int, N0: float, rng: np.random.Generator) -> np.ndarray:
    """n circular Gaussian samples with total variance N0"""
    if N0 == 0:
        return np.zeros(n, dtype=np.complex128)
    w = rng.standard_normal((2, n))
    return np.sqrt(N0 / 2) * (w[0] + 1j * w[1])


def snr_to_noise(E: float, snr_db: float, axis: SnrAxis = "es_n0", M: int = 2) -> float:
    """N0 giving the requested E/N0 (or Eb/N0 with Eb = E / log2 M); inf dB gives 0"""
    if np.isnan(snr_db) or snr_db == -np.inf:
        raise ConfigError(f"SNR must be a number or +inf dB, got {snr_db}")
    if np.isinf(snr_db):
        return 0.0
    es_n0 = float(np.power(10.0, snr_db / 10))
    if axis == "eb_n0":
        es_n0 *= np.log2(M)
    if es_n0 == 0:
        raise ConfigError(f"SNR of {snr_db} dB leaves no signal to detect")
    return E / es_n0


# -----------------------------------------------------------------------------
# Channel Application
# -----------------------------------------------------------------------------
def apply_channel(
    signal: np.ndarray,
    ch: ChannelModel,
    noise: Optional[NoiseSpec] = None,
) -> np.ndarray:
    """Full linear convolution with the taps plus AWGN; length grows by P - 1"""
    x = np.asarray(signal, dtype=np.complex128)
    if x.size == 0:
        raise ValueError("cannot transmit an empty signal")

    y = np.convolve(x, ch.as_array())
    if noise is not None and noise.N0 > 0:
        y = y + complex_awgn(y.size, noise.N0, make_rng(noise.rng_seed))
    return y


def convolution_matrix(taps: Sequence[complex], L: int) -> np.ndarray:
    """(L + P - 1) x L banded Toeplitz matrix whose product with x is taps * x"""
    if L < 1:
        raise ValueError("L must be at least 1")
    h = np.asarray(taps, dtype=np.complex128)
    column = np.concatenate([h, np.zeros(L - 1, dtype=np.complex128)])
    row = np.zeros(L, dtype=np.complex128)
    row[0] = h[0]
    return toeplitz(column, row)


def build_H(ch: ChannelModel, L: int) -> np.ndarray:
    return convolution_matrix(ch.taps, L)


# -----------------------------------------------------------------------------
# Channel Profiles
# -----------------------------------------------------------------------------
def sample_random_channel(
    P: int,
    profile: str,
    seed: int = 0,
    taps: Optional[Iterable[object]] = None,
    decay_samples: float = 1.0,
) -> ChannelModel:
    """
    Draw a channel for one packet.

    identity      single unit tap
    fixed         the user taps verbatim ("re,im" strings or numbers)
    exp-rayleigh  complex Gaussian taps with power ~ exp(-p / decay_samples),
                  uniform phase, normalised to unit energy
    """
    if P < 1:
        raise ConfigError("a channel needs at least one path")

    if profile == "identity":
        return ChannelModel.identity()

    if profile == "fixed":
        if taps is None:
            raise ConfigError("fixed channel profile needs taps")
        parsed = tuple(parse_tap(t) for t in taps)
        if len(parsed) != P:
            raise ConfigError(f"fixed profile lists {len(parsed)} taps, expected {P}")
        try:
            return ChannelModel(taps=parsed)
        except ValueError as e:
            raise ConfigError(f"invalid fixed taps: {e}")

    if profile == "exp-rayleigh":
        rng = make_rng(seed)
        power = np.exp(-np.arange(P) / decay_samples)
        g = rng.standard_normal((2, P))
        h = np.sqrt(power / 2) * (g[0] + 1j * g[1])
        h /= np.linalg.norm(h)
        return ChannelModel(taps=tuple(complex(t) for t in h))

    raise ConfigError(
        f"unknown channel profile '{profile}', expected one of {', '.join(CHANNEL_PROFILES)}"
    )


def channel_from_spec(spec: ChannelSpec, seed: int = 0) -> ChannelModel:
    ch = sample_random_channel(
        spec.paths if spec.profile == "exp-rayleigh" else max(1, len(spec.taps)),
        spec.profile,
        seed=seed,
        taps=spec.taps or None,
        decay_samples=spec.decay_samples,
    )
    if spec.profile == "fixed" and spec.normalize:
        return ch.normalized()
    return ch
