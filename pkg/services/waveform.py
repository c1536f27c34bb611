"""
M-ary orthogonal chirp alphabet: bank construction, Gray labelling and
correlation analysis.

Chirp m starts at f0 + m * delta_f and sweeps mu Hz/s for one symbol. On the
sample grid the product of two chirps cancels the quadratic phase, leaving a
tone at (k - l) * delta_f whose sum over L samples vanishes exactly when
delta_f * T is an integer.
"""
from __future__ import annotations

import logging
import math
from typing import Any, Dict

import numpy as np

from models.waveform import ChirpBank, ChirpParams
from utils.errors import ConfigError, SymbolRangeError

logger = logging.getLogger(__name__)

# Tolerance used when deciding whether T*fs and delta_f*T are integers
INTEGER_TOLERANCE = 1e-9


def _is_integer(x: float) -> bool:
    return abs(x - round(x)) <= INTEGER_TOLERANCE * max(1.0, abs(x))


def _is_power_of_two(M: int) -> bool:
    return M >= 2 and (M & (M - 1)) == 0


# -----------------------------------------------------------------------------
# Validation
# -----------------------------------------------------------------------------
def validate_params(params: ChirpParams) -> None:
    """Raise ConfigError for any parameter set that cannot form a valid bank"""
    if not _is_power_of_two(params.M):
        raise ConfigError(f"modulation order {params.M} is not a power of two")

    if not _is_integer(params.T * params.fs):
        raise ConfigError(
            f"T * fs = {params.T * params.fs:.9g} is not an integer number of samples"
        )

    cycles = params.spacing_cycles
    if params.enforce_orthogonality and (not _is_integer(cycles) or round(cycles) < 1):
        raise ConfigError(
            f"delta_f * T = {cycles:.9g} must be a positive integer for orthogonal chirps"
        )

    if params.fs < params.highest_frequency:
        raise ConfigError(
            f"fs = {params.fs:g} Hz is below the highest chirp frequency "
            f"{params.highest_frequency:g} Hz"
        )


# -----------------------------------------------------------------------------
# Gray Mapping
# -----------------------------------------------------------------------------
def _check_order(M: int) -> int:
    if not _is_power_of_two(M):
        raise SymbolRangeError(f"modulation order {M} is not a power of two")
    return int(round(math.log2(M)))


def gray_encode(m: int, M: int) -> np.ndarray:
    """Binary-reflected Gray label of symbol m, MSB first"""
    k = _check_order(M)
    if not 0 <= m < M:
        raise SymbolRangeError(f"symbol index {m} outside [0, {M})")
    g = m ^ (m >> 1)
    return np.array([(g >> (k - 1 - i)) & 1 for i in range(k)], dtype=np.uint8)


def gray_decode(bits) -> int:
    """Symbol index whose Gray label is `bits` (MSB first)"""
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.size == 0:
        raise SymbolRangeError("a Gray label must be a non-empty bit vector")
    if np.any((bits != 0) & (bits != 1)):
        raise SymbolRangeError(f"label {bits.tolist()} contains non-binary values")

    g = 0
    for b in bits:
        g = (g << 1) | int(b)
    m = g
    shift = g >> 1
    while shift:
        m ^= shift
        shift >>= 1
    return m


def gray_table(M: int) -> np.ndarray:
    """M x log2(M) table of labels, row m is the label of symbol m"""
    return np.stack([gray_encode(m, M) for m in range(M)])


def bits_to_symbols(bits, M: int) -> np.ndarray:
    """Map a flat bit vector onto symbol indices, log2(M) bits per symbol"""
    k = _check_order(M)
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.size % k:
        raise SymbolRangeError(f"{bits.size} bits do not split into {k}-bit labels")
    if np.any((bits != 0) & (bits != 1)):
        raise SymbolRangeError("payload contains non-binary values")

    weights = 1 << np.arange(k - 1, -1, -1)
    g = bits.reshape(-1, k) @ weights
    m = g.copy()
    shift = g >> 1
    while np.any(shift):
        m ^= shift
        shift >>= 1
    return m.astype(np.int64)


def symbols_to_bits(indices, M: int) -> np.ndarray:
    """Concatenate the Gray labels of a sequence of symbol indices"""
    indices = np.asarray(indices, dtype=np.int64).ravel()
    if np.any((indices < 0) | (indices >= M)):
        raise SymbolRangeError(f"symbol indices outside [0, {M})")
    return gray_table(M)[indices].reshape(-1).astype(np.uint8)


# -----------------------------------------------------------------------------
# Bank Construction
# -----------------------------------------------------------------------------
def build_bank(params: ChirpParams) -> ChirpBank:
    """Sample and normalise the M chirps of `params` and attach Gray labels"""
    validate_params(params)

    L = params.L
    t = np.arange(L) / params.fs
    m = np.arange(params.M)[:, None]

    phase = 2 * np.pi * (params.f0 + m * params.delta_f) * t + np.pi * params.mu * t**2
    waveforms = np.exp(1j * phase)
    waveforms /= np.linalg.norm(waveforms, axis=1, keepdims=True)
    waveforms.setflags(write=False)

    labels = gray_table(params.M)
    labels.setflags(write=False)

    bank = ChirpBank(params=params, waveforms=waveforms, labels=labels)

    if not params.enforce_orthogonality:
        worst = max_cross_correlation(bank)
        logger.warning(
            f"Built non-orthogonal bank: delta_f * T = {params.spacing_cycles:.6f}, "
            f"max |rho| = {worst:.3e}"
        )
    else:
        logger.debug(f"Built {params.M}-ary chirp bank, L = {L}")

    return bank


# -----------------------------------------------------------------------------
# Correlation Analysis
# -----------------------------------------------------------------------------
def cross_correlation(bank: ChirpBank, k: int, l: int) -> complex:
    """<psi_k, psi_l> = sum_n psi_k[n] conj(psi_l[n])"""
    for idx in (k, l):
        if not 0 <= idx < bank.M:
            raise SymbolRangeError(f"symbol index {idx} outside [0, {bank.M})")
    return complex(np.vdot(bank.waveforms[l], bank.waveforms[k]))


def gram_matrix(bank: ChirpBank) -> np.ndarray:
    """G[k, l] = <psi_k, psi_l>"""
    W = bank.waveforms
    return W @ W.conj().T


def max_cross_correlation(bank: ChirpBank) -> float:
    """Largest off-diagonal |rho_kl|"""
    G = np.abs(gram_matrix(bank))
    np.fill_diagonal(G, 0.0)
    return float(G.max())


def instantaneous_frequency(bank: ChirpBank, m: int) -> np.ndarray:
    """
    Frequency of chirp m between consecutive samples [Hz], from the phase
    increment, folded into [0, fs). Entry n belongs to time (n + 0.5) / fs.
    """
    if not 0 <= m < bank.M:
        raise SymbolRangeError(f"symbol index {m} outside [0, {bank.M})")
    w = bank.waveforms[m]
    increment = np.angle(w[1:] * np.conj(w[:-1]))
    return np.mod(increment * bank.params.fs / (2 * np.pi), bank.params.fs)


def bank_diagnostics(bank: ChirpBank) -> Dict[str, Any]:
    """Summary used by the `bank` command"""
    p = bank.params
    return {
        "modulation_order": p.M,
        "samples_per_symbol": p.L,
        "symbol_duration_ms": p.T * 1e3,
        "frequency_spacing_hz": p.delta_f,
        "spacing_cycles_per_symbol": p.spacing_cycles,
        "chirp_bandwidth_hz": p.B_c,
        "start_frequencies_hz": [p.f0 + m * p.delta_f for m in range(p.M)],
        "occupied_band_hz": (p.f0, p.highest_frequency),
        "gray_labels": ["".join(str(b) for b in row) for row in bank.labels],
        "max_cross_correlation": max_cross_correlation(bank),
        "bit_rate_bps": p.bit_rate,
    }
