"""
Packet assembly and carrier conversion.

A packet is [PN training chips | guard silence | N chirp symbols], one PN
chip per baseband sample. Passband rendering happens at a separate, higher
rate and is only used for WAV export.
"""
from __future__ import annotations

import logging
import math
from fractions import Fraction

import numpy as np
from scipy import signal

from config.profiles import FrameSection
from models.frame import FrameLayout, Packet
from models.waveform import ChirpBank, ChirpParams
from services.waveform import bits_to_symbols
from utils.errors import ConfigError

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# PN Training
# -----------------------------------------------------------------------------
def pn_sequence(N_pn: int, seed: int = 1) -> np.ndarray:
    """
    Antipodal m-sequence of length N_pn.

    The register length is the smallest n with 2**n - 1 >= N_pn, the feedback
    taps are scipy's default primitive polynomial for that length, and the
    initial register state is the low n bits of `seed` (must be non-zero).
    Chips map 0 -> +1 and 1 -> -1.
    """
    if N_pn < 1:
        raise ConfigError("PN length must be at least one chip")
    nbits = max(2, math.ceil(math.log2(N_pn + 1)))
    state_word = seed % (1 << nbits)
    if state_word == 0:
        raise ConfigError(f"PN seed {seed} gives an all-zero {nbits}-bit register")
    state = np.array([(state_word >> i) & 1 for i in range(nbits)], dtype=np.int8)

    seq, _ = signal.max_len_seq(nbits, state=state, length=N_pn)
    return 1.0 - 2.0 * seq.astype(np.float64)


def _samples(duration_s: float, fs: float, what: str) -> int:
    n = duration_s * fs
    if abs(n - round(n)) > 1e-9 * max(1.0, n):
        raise ConfigError(f"{what} of {duration_s:g} s is not a whole number of samples")
    return int(round(n))


def build_layout(frame: FrameSection, params: ChirpParams) -> FrameLayout:
    """Frame geometry for a profile's [frame] section"""
    pn = pn_sequence(frame.pn_length_chips, frame.pn_seed)
    pn.setflags(write=False)
    return FrameLayout(
        pn_seq=pn,
        L_g=_samples(frame.guard_duration_ms * 1e-3, params.fs, "guard interval"),
        N=frame.symbols_per_packet,
        E=frame.symbol_energy,
    )


def packet_length(layout: FrameLayout, L: int) -> int:
    return layout.data_start + layout.N * L


def packet_duration(layout: FrameLayout, params: ChirpParams) -> float:
    """Airtime of one packet [s]"""
    return packet_length(layout, params.L) / params.fs


def payload_throughput(layout: FrameLayout, params: ChirpParams) -> float:
    """Payload bits per second of airtime, header and guard included"""
    return layout.N * params.bits_per_symbol / packet_duration(layout, params)


# -----------------------------------------------------------------------------
# Modulation
# -----------------------------------------------------------------------------
def modulate(bits, bank: ChirpBank, layout: FrameLayout) -> Packet:
    """Gray-map `bits` onto chirps and prepend the training header and guard"""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    expected = layout.N * bank.bits_per_symbol
    if bits.size != expected:
        raise ConfigError(
            f"payload has {bits.size} bits, frame carries {expected} "
            f"({layout.N} symbols x {bank.bits_per_symbol} bits)"
        )

    indices = bits_to_symbols(bits, bank.M)
    symbols = np.sqrt(layout.E) * bank.waveforms[indices].reshape(-1)

    baseband = np.concatenate([
        layout.pn_seq.astype(np.complex128),
        np.zeros(layout.L_g, dtype=np.complex128),
        symbols,
    ])
    return Packet(payload_bits=bits, symbol_indices=indices, baseband=baseband)


# -----------------------------------------------------------------------------
# Carrier Conversion
# -----------------------------------------------------------------------------
def _rate_ratio(params: ChirpParams) -> Fraction:
    ratio = Fraction(params.fs_passband / params.fs).limit_denominator(10_000)
    if abs(float(ratio) - params.fs_passband / params.fs) > 1e-12 * float(ratio):
        raise ConfigError("passband and baseband rates must have a rational ratio")
    return ratio


def _check_carrier(params: ChirpParams, fc: float) -> None:
    half_band = params.fs / 2
    if fc - half_band <= 0 or params.fs_passband <= 2 * (fc + half_band):
        raise ConfigError(
            f"carrier {fc:g} Hz with baseband half-width {half_band:g} Hz does not fit "
            f"a real passband sampled at {params.fs_passband:g} Hz"
        )


def upconvert(baseband: np.ndarray, params: ChirpParams, fc: float | None = None) -> np.ndarray:
    """
    Real passband samples at params.fs_passband.

    The baseband is interpolated in the frequency domain (band-limited to
    +-fs/2), so every baseband component, PN chips included, survives
    `downconvert` exactly. The input is zero-padded to a multiple of the rate
    ratio's denominator.
    """
    fc = params.fc if fc is None else fc
    _check_carrier(params, fc)
    x = np.asarray(baseband, dtype=np.complex128)
    if x.size == 0:
        return np.zeros(0)

    ratio = _rate_ratio(params)
    pad = (-x.size) % ratio.denominator
    x = np.concatenate([x, np.zeros(pad, dtype=np.complex128)])
    n_out = x.size * ratio.numerator // ratio.denominator

    up = signal.resample(x, n_out)
    t = np.arange(n_out) / params.fs_passband
    return np.real(up * np.exp(2j * np.pi * fc * t))


def downconvert(passband: np.ndarray, params: ChirpParams, fc: float | None = None) -> np.ndarray:
    """Complex baseband at params.fs from real passband samples"""
    fc = params.fc if fc is None else fc
    _check_carrier(params, fc)
    x = np.asarray(passband, dtype=np.float64)
    if x.size == 0:
        return np.zeros(0, dtype=np.complex128)

    ratio = _rate_ratio(params)
    if x.size % ratio.numerator:
        raise ConfigError(
            f"passband length {x.size} is not a multiple of the rate ratio {ratio}"
        )
    n_out = x.size * ratio.denominator // ratio.numerator

    t = np.arange(x.size) / params.fs_passband
    mixed = 2.0 * x * np.exp(-2j * np.pi * fc * t)
    return signal.resample(mixed, n_out)
