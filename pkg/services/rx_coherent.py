"""
Coherent receiver: PN synchronisation, least-squares channel estimation and
channel-equalised correlation against the chirp bank.

Symbol n is read from a window of L + P - 1 samples starting at its nominal
start, so consecutive windows overlap by P - 1 samples. Energy the previous
symbol spills into the head of a window is left as model mismatch.
"""
from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np
from scipy import linalg, signal

from models.detection import ChannelEstimate, DetectionResult, ReceiverOptions
from models.frame import FrameLayout
from models.waveform import ChirpBank
from services.channel import convolution_matrix
from services.waveform import symbols_to_bits
from utils.errors import ChannelEstimationError, DetectionError, NoPacketFound

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# Synchronisation
# -----------------------------------------------------------------------------
def pn_correlation(rx: np.ndarray, pn_seq: np.ndarray) -> np.ndarray:
    """c[k] = sum_i rx[k + i] * conj(pn[i]) for every lag where the header fits"""
    rx = np.asarray(rx, dtype=np.complex128)
    if rx.size < pn_seq.size:
        raise NoPacketFound(
            f"received {rx.size} samples, shorter than the {pn_seq.size}-chip header"
        )
    return signal.correlate(rx, pn_seq.astype(np.complex128), mode="valid")


def _window(n_lags: int, search_window: Optional[Tuple[int, int]]) -> Tuple[int, int]:
    lo, hi = (0, n_lags) if search_window is None else search_window
    lo, hi = max(0, lo), min(n_lags, hi)
    if hi <= lo:
        raise NoPacketFound(f"empty synchronisation window [{lo}, {hi})")
    return lo, hi


def synchronize(
    rx: np.ndarray,
    pn_seq: np.ndarray,
    search_window: Optional[Tuple[int, int]] = None,
    floor_ratio: float = 6.0,
) -> int:
    """
    Frame start = lag of the largest |correlation| with the PN header inside
    the search window (earliest lag on ties). The peak must reach
    floor_ratio times the median |correlation| over the window.
    """
    return _locate_peak(np.abs(pn_correlation(rx, pn_seq)), search_window, floor_ratio)


def _locate_peak(
    corr_mag: np.ndarray,
    search_window: Optional[Tuple[int, int]],
    floor_ratio: float,
) -> int:
    lo, hi = _window(corr_mag.size, search_window)
    mags = corr_mag[lo:hi]

    k = int(np.argmax(mags))
    peak = mags[k]
    floor = floor_ratio * float(np.median(mags))
    if peak <= 0 or peak < floor:
        raise NoPacketFound(
            f"no packet found: correlation peak {peak:.3g} below floor {floor:.3g}"
        )

    logger.debug(f"PN peak at offset {lo + k}, |c| = {peak:.3g}")
    return lo + k


# -----------------------------------------------------------------------------
# Channel Estimation
# -----------------------------------------------------------------------------
def training_matrix(pn_seq: np.ndarray, P: int) -> np.ndarray:
    """(N_pn + P - 1) x P Toeplitz matrix of shifted training chips"""
    return convolution_matrix(pn_seq, P)


def _check_rank(A: np.ndarray, rcond: float, error: type, what: str) -> float:
    s = linalg.svdvals(A)
    hint = float(s[-1] / s[0]) if s.size and s[0] > 0 else 0.0
    if hint < rcond:
        raise error(f"{what} is ill-conditioned (s_min / s_max = {hint:.3g})")
    return hint


def estimate_channel(
    y_tr: np.ndarray,
    pn_seq: np.ndarray,
    P: int,
    rcond: float = 1e-8,
) -> ChannelEstimate:
    """LS tap estimate h_hat = argmin ||y_tr - B_tr h||^2 through a QR factorisation"""
    y_tr = np.asarray(y_tr, dtype=np.complex128)
    N_pn = pn_seq.size
    if P > N_pn:
        raise ChannelEstimationError(f"{P} taps cannot be estimated from {N_pn} chips")
    if y_tr.size != N_pn + P - 1:
        raise ChannelEstimationError(
            f"training window has {y_tr.size} samples, expected {N_pn + P - 1}"
        )

    B = training_matrix(pn_seq, P)
    hint = _check_rank(B, rcond, ChannelEstimationError, "training matrix")

    q, r = linalg.qr(B, mode="economic")
    h_hat = linalg.solve_triangular(r, q.conj().T @ y_tr)
    residual = float(np.sum(np.abs(y_tr - B @ h_hat) ** 2))

    return ChannelEstimate(h_hat=h_hat, residual_norm=residual, condition_hint=hint)


def locate_first_path(
    rx: np.ndarray,
    pn_seq: np.ndarray,
    peak: int,
    P: int,
    rcond: float = 1e-8,
) -> Tuple[int, ChannelEstimate]:
    """
    Channel origin in [peak - P + 1, peak] whose P-tap LS fit of the header
    leaves the smallest residual, with that fit.

    Residuals closer to the best than 1e-9 of the window energy are ties.
    Ties go to the latest lag, the first path of a response shorter than P.
    """
    span = pn_seq.size + P - 1
    lo = max(0, peak - P + 1)
    rx = _pad_to(rx, peak + span)

    fits = [
        (k, estimate_channel(rx[k:k + span], pn_seq, P, rcond))
        for k in range(lo, peak + 1)
    ]
    best = min(estimate.residual_norm for _, estimate in fits)
    tol = 1e-9 * float(np.sum(np.abs(rx[lo:peak + span]) ** 2))
    return [fit for fit in fits if fit[1].residual_norm <= best + tol][-1]


# -----------------------------------------------------------------------------
# Detection
# -----------------------------------------------------------------------------
def equalize(H_hat: np.ndarray, Y: np.ndarray, rcond: float = 1e-8) -> np.ndarray:
    """LS solution z of H_hat z = y for one window or for each column of Y"""
    _check_rank(H_hat, rcond, DetectionError, "estimated channel matrix")
    q, r = linalg.qr(H_hat, mode="economic")
    return linalg.solve_triangular(r, q.conj().T @ Y)


def _scores(bank: ChirpBank, Z: np.ndarray, metric: str) -> np.ndarray:
    corr = bank.waveforms.conj() @ Z
    return np.real(corr) if metric == "real" else np.abs(corr)


def detect_coherent(
    y_n: np.ndarray,
    H_hat: np.ndarray,
    bank: ChirpBank,
    metric: str = "real",
    rcond: float = 1e-8,
) -> Tuple[int, np.ndarray]:
    """
    Equalise one extended window and pick the best-correlating chirp.

    metric "real" scores Re(psi_m^H z), using the phase the channel estimate
    restored; "magnitude" scores |psi_m^H z|. Ties go to the lowest index.
    """
    y_n = np.asarray(y_n, dtype=np.complex128)
    L = bank.L
    if H_hat.ndim != 2 or H_hat.shape[1] != L or y_n.shape != (H_hat.shape[0],):
        raise DetectionError(
            f"window of {y_n.shape} does not match channel matrix {H_hat.shape} for L = {L}"
        )
    z = equalize(H_hat, y_n, rcond)
    scores = _scores(bank, z, metric)
    return int(np.argmax(scores)), scores


# -----------------------------------------------------------------------------
# Packet Reception
# -----------------------------------------------------------------------------
def _pad_to(rx: np.ndarray, n: int) -> np.ndarray:
    if rx.size >= n:
        return rx
    return np.concatenate([rx, np.zeros(n - rx.size, dtype=np.complex128)])


def receive_packet_coherent(
    rx: np.ndarray,
    bank: ChirpBank,
    layout: FrameLayout,
    P: Optional[int] = None,
    options: Optional[ReceiverOptions] = None,
) -> DetectionResult:
    """synchronise -> estimate taps -> equalise every symbol window -> Gray-decode"""
    options = options or ReceiverOptions()
    P = P or options.paths
    rx = np.asarray(rx, dtype=np.complex128)
    L, N, M = bank.L, layout.N, bank.M

    peak = synchronize(rx, layout.pn_seq, options.search_window, options.sync_floor_ratio)
    offset, estimate = locate_first_path(rx, layout.pn_seq, peak, P, options.rcond)

    data_start = offset + layout.data_start
    rx = _pad_to(rx, data_start + N * L + P - 1)
    logger.debug(f"Offset {offset}, h_hat = {np.round(estimate.h_hat, 3)}")

    if N == 0:
        return DetectionResult(
            symbol_indices=np.zeros(0, dtype=np.int64),
            bits=np.zeros(0, dtype=np.uint8),
            metrics=np.zeros((0, M)),
            sync_offset=offset,
            channel_estimate=estimate,
        )

    starts = data_start + L * np.arange(N)
    Y = rx[starts[None, :] + np.arange(L + P - 1)[:, None]]

    H_hat = convolution_matrix(estimate.h_hat, L)
    Z = equalize(H_hat, Y, options.rcond)
    scores = _scores(bank, Z, options.coherent_metric).T
    indices = np.argmax(scores, axis=1).astype(np.int64)

    return DetectionResult(
        symbol_indices=indices,
        bits=symbols_to_bits(indices, M),
        metrics=scores,
        sync_offset=offset,
        channel_estimate=estimate,
    )
