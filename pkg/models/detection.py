from __future__ import annotations

from typing import Literal, Optional, Tuple

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field

# Per-symbol square-law scores, one row per symbol and one column per chirp
EnvelopeMetrics = npt.NDArray[np.float64]


# -----------------------------------------------------------------------------
# Channel Estimate
# -----------------------------------------------------------------------------
class ChannelEstimate(BaseModel):
    """Least-squares tap estimate from the PN training block"""

    h_hat: np.ndarray
    residual_norm: float = Field(..., ge=0, description="||y_tr - B_tr h_hat||^2")
    condition_hint: float = Field(
        ...,
        ge=0,
        description="Smallest over largest singular value of B_tr"
    )

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @property
    def P(self) -> int:
        return int(self.h_hat.size)


# -----------------------------------------------------------------------------
# Detection Result
# -----------------------------------------------------------------------------
class DetectionResult(BaseModel):
    """Decisions for one packet"""

    symbol_indices: np.ndarray
    bits: np.ndarray
    metrics: np.ndarray = Field(
        ...,
        description="N x M decision statistics (correlations or envelopes)"
    )
    sync_offset: int = Field(..., ge=0, description="Detected frame start [samples]")
    channel_estimate: Optional[ChannelEstimate] = None

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @property
    def N(self) -> int:
        return int(self.symbol_indices.size)


# -----------------------------------------------------------------------------
# Receiver Options
# -----------------------------------------------------------------------------
class ReceiverOptions(BaseModel):
    """Receiver knobs shared by both detectors (the [receiver] profile section)"""

    kind: Literal["coherent", "noncoherent"] = "coherent"
    paths: int = Field(4, ge=1, description="Channel taps estimated by the coherent receiver")
    sync_floor_ratio: float = Field(
        6.0,
        gt=0,
        description="Correlation peak must exceed this multiple of the median"
    )
    coherent_metric: Literal["real", "magnitude"] = "real"
    noncoherent_form: Literal["quadrature", "split"] = "quadrature"
    rcond: float = Field(1e-8, gt=0, description="Relative singular value floor for LS solves")
    search_window: Optional[Tuple[int, int]] = Field(
        None,
        description="Half-open range of candidate frame offsets; None searches everything"
    )

    model_config = ConfigDict(frozen=True, extra="forbid")
