from __future__ import annotations

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


# -----------------------------------------------------------------------------
# Chirp Parameters
# -----------------------------------------------------------------------------
class ChirpParams(BaseModel):
    """Waveform constants of an M-ary orthogonal chirp alphabet (SI units)"""

    M: int = Field(..., ge=2, description="Modulation order, a power of two")
    T: float = Field(..., gt=0, description="Symbol duration [s]")
    f0: float = Field(..., ge=0, description="Initial frequency of chirp 0 [Hz]")
    delta_f: float = Field(..., gt=0, description="Frequency spacing between chirps [Hz]")
    mu: float = Field(..., ge=0, description="Chirp rate [Hz/s]; 0 gives M-FSK tones")
    fs: float = Field(..., gt=0, description="Complex baseband sampling rate [Hz]")
    fc: float = Field(100e3, gt=0, description="Carrier frequency [Hz]")
    fs_passband: float = Field(400e3, gt=0, description="Sampling rate of the real passband rendering [Hz]")
    enforce_orthogonality: bool = Field(
        True,
        description="Reject banks whose spacing is not an integer multiple of 1/T"
    )

    model_config = ConfigDict(frozen=True)

    @property
    def B_c(self) -> float:
        """Chirp sweep bandwidth [Hz]"""
        return self.mu * self.T

    @property
    def L(self) -> int:
        """Samples per symbol"""
        return int(round(self.T * self.fs))

    @property
    def bits_per_symbol(self) -> int:
        return int(round(math.log2(self.M)))

    @property
    def spacing_cycles(self) -> float:
        """delta_f * T, the number of cycles separating adjacent chirps per symbol"""
        return self.delta_f * self.T

    @property
    def highest_frequency(self) -> float:
        return self.f0 + (self.M - 1) * self.delta_f + self.B_c

    @property
    def bit_rate(self) -> float:
        """Raw bit rate of back-to-back symbols [bit/s]"""
        return self.bits_per_symbol / self.T


# -----------------------------------------------------------------------------
# Chirp Bank
# -----------------------------------------------------------------------------
class ChirpBank(BaseModel):
    """
    The M sampled unit-energy chirps plus their Gray labels.

    `waveforms` is M x L, `labels` is M x log2(M) (MSB first). Both arrays
    are read-only once the bank is built.
    """

    params: ChirpParams
    waveforms: np.ndarray
    labels: np.ndarray

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @property
    def M(self) -> int:
        return self.params.M

    @property
    def L(self) -> int:
        return self.params.L

    @property
    def bits_per_symbol(self) -> int:
        return self.params.bits_per_symbol
