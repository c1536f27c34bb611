from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import List, Optional, Union

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config.settings import settings
from models.detection import ReceiverOptions
from models.sweep import ChannelSpec, SnrAxis
from models.waveform import ChirpParams
from utils.errors import ConfigError

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# Profile Sections
# -----------------------------------------------------------------------------
class WaveformSection(BaseModel):
    """[waveform] - chirp alphabet and sampling"""

    modulation_order: int = Field(8, ge=2)
    symbol_duration_ms: float = Field(0.33, gt=0)
    initial_frequency_hz: float = Field(3050.0, ge=0)
    frequency_spacing_bins: Optional[int] = Field(
        None,
        ge=1,
        description="Spacing as an integer multiple of 1/T (exact)"
    )
    frequency_spacing_hz: Optional[float] = Field(None, gt=0)
    chirp_rate_hz_per_s: float = Field(9.31e6, ge=0)
    sample_rate_hz: float = Field(100e3, gt=0)
    carrier_frequency_hz: float = Field(100e3, gt=0)
    passband_sample_rate_hz: float = Field(400e3, gt=0)
    enforce_orthogonality: bool = True

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def one_spacing(self):
        if (self.frequency_spacing_bins is None) == (self.frequency_spacing_hz is None):
            raise ValueError(
                "give exactly one of frequency_spacing_bins or frequency_spacing_hz"
            )
        return self

    def to_params(self) -> ChirpParams:
        T = self.symbol_duration_ms * 1e-3
        if self.frequency_spacing_bins is not None:
            delta_f = self.frequency_spacing_bins / T
        else:
            delta_f = float(self.frequency_spacing_hz)
        return ChirpParams(
            M=self.modulation_order,
            T=T,
            f0=self.initial_frequency_hz,
            delta_f=delta_f,
            mu=self.chirp_rate_hz_per_s,
            fs=self.sample_rate_hz,
            fc=self.carrier_frequency_hz,
            fs_passband=self.passband_sample_rate_hz,
            enforce_orthogonality=self.enforce_orthogonality,
        )


class FrameSection(BaseModel):
    """[frame] - PN header, guard and payload"""

    pn_length_chips: int = Field(128, ge=1)
    pn_seed: int = Field(1, ge=1)
    guard_duration_ms: float = Field(5.12, ge=0)
    symbols_per_packet: int = Field(32, ge=0)
    symbol_energy: float = Field(1.0, gt=0)

    model_config = ConfigDict(frozen=True, extra="forbid")


class SweepSection(BaseModel):
    """[sweep] - defaults for Monte Carlo runs"""

    snr_db: List[float] = Field(default_factory=lambda: [0.0, 2.0, 4.0, 6.0, 8.0, 10.0])
    snr_axis: SnrAxis = "es_n0"
    min_bit_errors: int = Field(100, ge=1)
    max_bits: int = Field(10_000_000, ge=1)
    base_seed: int = Field(0, ge=0)
    confidence: float = Field(0.95, gt=0, lt=1)
    lead_in_samples: int = Field(64, ge=0)

    model_config = ConfigDict(frozen=True, extra="forbid")


class ModemProfile(BaseModel):
    """A complete modem profile as loaded from TOML"""

    name: str = "default"
    waveform: WaveformSection = Field(default_factory=lambda: WaveformSection(frequency_spacing_bins=1))
    frame: FrameSection = Field(default_factory=FrameSection)
    channel: ChannelSpec = Field(default_factory=ChannelSpec)
    receiver: ReceiverOptions = Field(default_factory=ReceiverOptions)
    sweep: SweepSection = Field(default_factory=SweepSection)

    model_config = ConfigDict(frozen=True, extra="forbid")

    def chirp_params(self) -> ChirpParams:
        return self.waveform.to_params()

    def with_modulation_order(self, M: int) -> "ModemProfile":
        waveform = self.waveform.model_copy(update={"modulation_order": M})
        return self.model_copy(update={"waveform": waveform})


# -----------------------------------------------------------------------------
# Loading
# -----------------------------------------------------------------------------
def resolve_profile_path(name_or_path: Union[str, Path]) -> Path:
    """A bare name maps to PROFILE_DIR/<name>.toml; anything else is a path"""
    candidate = Path(name_or_path)
    if candidate.suffix == ".toml" or candidate.exists():
        return candidate
    return settings.PROFILE_DIR / f"{name_or_path}.toml"


def load_profile(name_or_path: Union[str, Path, None] = None) -> ModemProfile:
    """Load and validate a modem profile; every failure becomes a ConfigError"""
    path = resolve_profile_path(name_or_path or settings.DEFAULT_PROFILE)

    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"profile not found: {path}")
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: malformed TOML: {e}")

    data.setdefault("name", path.stem)

    try:
        profile = ModemProfile.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}")

    logger.info(f"Loaded profile '{profile.name}' from {path}")
    return profile
