"""
Non-coherent receiver: square-law envelope of the matched-filter bank on
length-L windows, no channel knowledge.

Two score forms are available:

    quadrature  s_m = |psi_m^H y|^2
    split       s_m = |Re(psi_m)^T y|^2 + |Im(psi_m)^T y|^2

Both are invariant to a common phase rotation of y. The split form equals
(|psi_m^H y|^2 + |psi_m^T y|^2) / 2; the image term psi_m^T y keeps its
off-target scores from vanishing on an orthogonal bank. Decisions agree with
the quadrature form when the input is noiseless.
"""
from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np

from models.detection import DetectionResult, EnvelopeMetrics, ReceiverOptions
from models.frame import FrameLayout
from models.waveform import ChirpBank
from services.rx_coherent import synchronize
from services.waveform import symbols_to_bits
from utils.errors import DetectionError

logger = logging.getLogger(__name__)


def envelope_metrics(Y: np.ndarray, bank: ChirpBank, form: str = "quadrature") -> EnvelopeMetrics:
    """Scores for one window (shape L) or for each column of Y (shape L x N)"""
    W = bank.waveforms
    if form == "quadrature":
        return np.abs(W.conj() @ Y) ** 2
    if form == "split":
        return np.abs(W.real @ Y) ** 2 + np.abs(W.imag @ Y) ** 2
    raise DetectionError(f"unknown envelope form '{form}'")


def detect_noncoherent(
    y_tilde: np.ndarray,
    bank: ChirpBank,
    form: str = "quadrature",
) -> Tuple[int, EnvelopeMetrics]:
    """Index of the largest envelope (lowest index on ties) and all M envelopes"""
    y_tilde = np.asarray(y_tilde, dtype=np.complex128)
    if y_tilde.shape != (bank.L,):
        raise DetectionError(f"window of shape {y_tilde.shape}, expected ({bank.L},)")
    scores = envelope_metrics(y_tilde, bank, form)
    return int(np.argmax(scores)), scores


def receive_packet_noncoherent(
    rx: np.ndarray,
    bank: ChirpBank,
    layout: FrameLayout,
    options: Optional[ReceiverOptions] = None,
) -> DetectionResult:
    options = options or ReceiverOptions(kind="noncoherent")
    rx = np.asarray(rx, dtype=np.complex128)
    L, N, M = bank.L, layout.N, bank.M

    offset = synchronize(rx, layout.pn_seq, options.search_window, options.sync_floor_ratio)
    logger.debug(f"Non-coherent sync offset {offset}")

    if N == 0:
        return DetectionResult(
            symbol_indices=np.zeros(0, dtype=np.int64),
            bits=np.zeros(0, dtype=np.uint8),
            metrics=np.zeros((0, M)),
            sync_offset=offset,
        )

    data_start = offset + layout.data_start
    end = data_start + N * L
    if rx.size < end:
        rx = np.concatenate([rx, np.zeros(end - rx.size, dtype=np.complex128)])

    # column n is symbol n
    Y = rx[data_start:end].reshape(N, L).T
    scores = envelope_metrics(Y, bank, options.noncoherent_form).T
    indices = np.argmax(scores, axis=1).astype(np.int64)

    return DetectionResult(
        symbol_indices=indices,
        bits=symbols_to_bits(indices, M),
        metrics=scores,
        sync_offset=offset,
    )
