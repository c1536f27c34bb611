from __future__ import annotations

from datetime import datetime
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.channel import parse_tap

ReceiverKind = Literal["coherent", "noncoherent"]
SnrAxis = Literal["es_n0", "eb_n0"]
ChannelProfileName = Literal["identity", "fixed", "exp-rayleigh"]


# -----------------------------------------------------------------------------
# Channel selection
# -----------------------------------------------------------------------------
class ChannelSpec(BaseModel):
    """How each simulated packet's channel is obtained"""

    profile: ChannelProfileName = "identity"
    paths: int = Field(1, ge=1, description="Number of taps for exp-rayleigh")
    taps: Tuple[complex, ...] = Field(
        (),
        description="User taps for the fixed profile"
    )
    decay_samples: float = Field(
        1.0,
        gt=0,
        description="exp-rayleigh power decay constant (power ~ exp(-p / decay))"
    )
    normalize: bool = Field(
        False,
        description="Scale fixed taps to unit total energy"
    )

    model_config = ConfigDict(frozen=True, extra="forbid")

    @field_validator("taps", mode="before")
    @classmethod
    def parse_pairs(cls, v):
        if isinstance(v, (list, tuple)):
            return tuple(parse_tap(t) for t in v)
        return v

    @model_validator(mode="after")
    def fixed_needs_taps(self):
        if self.profile == "fixed" and not self.taps:
            raise ValueError("fixed channel profile needs taps")
        return self


# -----------------------------------------------------------------------------
# Sweep Config
# -----------------------------------------------------------------------------
class SweepConfig(BaseModel):
    """One BER-vs-SNR Monte Carlo run"""

    profile_name: str = Field("default", description="Modem profile (name or TOML path)")
    receiver: ReceiverKind = "coherent"
    channel: ChannelSpec = Field(default_factory=ChannelSpec)
    snr_db: List[float] = Field(..., min_length=1)
    snr_axis: SnrAxis = "es_n0"
    min_bit_errors: int = Field(100, ge=1)
    max_bits: int = Field(10_000_000, ge=1)
    base_seed: int = Field(0, ge=0)
    confidence: float = Field(0.95, gt=0, lt=1)
    lead_in_samples: int = Field(64, ge=0, description="Noise-only samples before each packet")
    batch_packets: int = Field(64, ge=1)
    workers: int = Field(1, ge=1)

    model_config = ConfigDict(frozen=True, extra="forbid", ser_json_inf_nan="constants")

    @field_validator("snr_db")
    @classmethod
    def strictly_increasing(cls, v: List[float]) -> List[float]:
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("SNR grid must be strictly increasing")
        return v


# -----------------------------------------------------------------------------
# BER Report
# -----------------------------------------------------------------------------
class BerPoint(BaseModel):
    """Monte Carlo result at one SNR grid point"""

    snr_db: float
    bits: int = Field(..., ge=0)
    errors: int = Field(..., ge=0)
    ber: float = Field(..., ge=0, le=1)
    ci_lo: float
    ci_hi: float
    theory: float = Field(..., description="Closed-form reference for the receiver")
    theory_exact: float = Field(..., description="Exact M-ary orthogonal bit error probability")
    packets: int = Field(..., ge=0)
    failures: int = Field(0, ge=0)
    flagged: bool = False

    @model_validator(mode="after")
    def errors_within_bits(self):
        if self.errors > self.bits:
            raise ValueError("errors cannot exceed bits")
        return self


class RunMetadata(BaseModel):
    config_hash: str
    base_seed: int
    versions: Dict[str, str]


class BerReport(BaseModel):
    config: SweepConfig
    points: List[BerPoint]
    metadata: RunMetadata


class RunManifest(BaseModel):
    """Everything needed to rerun a sweep; the only place timestamps live"""

    created_at: datetime
    csv_path: str
    config: SweepConfig
    profile: Dict[str, object]
    metadata: RunMetadata
    notes: Optional[str] = None
