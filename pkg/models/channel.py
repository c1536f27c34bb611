from __future__ import annotations

from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


# -----------------------------------------------------------------------------
# Channel Model
# -----------------------------------------------------------------------------
class ChannelModel(BaseModel):
    """
    Tapped delay line on the integer sample lattice: tap p sits at delay p.
    Taps are the energy-including complex path gains.
    """

    taps: Tuple[complex, ...] = Field(..., min_length=1)

    model_config = ConfigDict(frozen=True)

    @field_validator("taps")
    @classmethod
    def first_arrival_nonzero(cls, v: Tuple[complex, ...]) -> Tuple[complex, ...]:
        """The first tap defines the delay origin"""
        if v[0] == 0:
            raise ValueError("taps[0] must be non-zero")
        return v

    @property
    def P(self) -> int:
        return len(self.taps)

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.as_array()) ** 2))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.taps, dtype=np.complex128)

    def normalized(self) -> "ChannelModel":
        """Same delay profile scaled to unit total energy"""
        h = self.as_array()
        return ChannelModel(taps=tuple(complex(t) for t in h / np.sqrt(np.sum(np.abs(h) ** 2))))

    @classmethod
    def identity(cls) -> "ChannelModel":
        return cls(taps=(1 + 0j,))


# -----------------------------------------------------------------------------
# Noise
# -----------------------------------------------------------------------------
class NoiseSpec(BaseModel):
    """Circular complex AWGN: total variance N0 per sample, N0/2 per real dimension"""

    N0: float = Field(0.0, ge=0)
    rng_seed: int = Field(0, ge=0)

    model_config = ConfigDict(frozen=True)


# -----------------------------------------------------------------------------
# Plain-text taps
# -----------------------------------------------------------------------------
def parse_tap(value: object) -> complex:
    """Parse a tap written as "re,im" (or a bare number) into a complex gain"""
    if isinstance(value, (int, float, complex)):
        return complex(value)
    text = str(value).strip()
    parts = [p.strip() for p in text.split(",")]
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) != 2:
        raise ValueError(f"tap '{text}' is not an 're,im' pair")
    return complex(float(parts[0]), float(parts[1]))
