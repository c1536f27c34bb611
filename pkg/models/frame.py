from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


# -----------------------------------------------------------------------------
# Frame Layout
# -----------------------------------------------------------------------------
class FrameLayout(BaseModel):
    """PN training header, guard and payload geometry of one packet"""

    pn_seq: np.ndarray = Field(..., description="Antipodal training chips")
    L_g: int = Field(..., ge=0, description="Guard length [samples]")
    N: int = Field(..., ge=0, description="Symbols per packet (0 = training-only frame)")
    E: float = Field(1.0, gt=0, description="Energy per symbol (linear)")

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @property
    def N_pn(self) -> int:
        return int(self.pn_seq.size)

    @property
    def data_start(self) -> int:
        """Offset of the first chirp symbol relative to the first PN chip"""
        return self.N_pn + self.L_g


# -----------------------------------------------------------------------------
# Packet
# -----------------------------------------------------------------------------
class Packet(BaseModel):
    """One modulated packet at complex baseband rate"""

    payload_bits: np.ndarray
    symbol_indices: np.ndarray
    baseband: np.ndarray

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


# -----------------------------------------------------------------------------
# WAV Sidecar
# -----------------------------------------------------------------------------
class WaveformMetadata(BaseModel):
    """Written next to every exported WAV so the capture can be undone exactly"""

    profile: str
    sample_rate_hz: int
    baseband_rate_hz: float
    carrier_frequency_hz: float
    sample_format: Literal["int16", "float32"]
    scale: float = Field(..., gt=0, description="Passband sample = scale * stored sample")
    peak_dbfs: float = -1.0
    baseband_length: int = Field(..., ge=0)
    modulation_order: int
    symbols_per_packet: int
    payload_bits: str | None = Field(
        None,
        description="Transmitted payload as a 0/1 string, when known"
    )
