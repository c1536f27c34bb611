"""
Result and signal files.

    <name>.csv            one row per SNR point, byte-stable for a given config and seed
    <name>.manifest.json  config, profile, seed, versions and the creation time
    <name>.wav            real passband packet, peak at -1 dBFS
    <name>.json           WAV sidecar with the exact scale needed to undo the export
"""
from __future__ import annotations

import csv
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import ValidationError
from scipy.io import wavfile

from config.profiles import ModemProfile
from models.frame import Packet, WaveformMetadata
from models.sweep import BerPoint, BerReport, RunManifest
from models.waveform import ChirpParams
from services.framing import downconvert, upconvert
from utils.errors import ConfigError, OutputError

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "snr_db", "bits", "errors", "ber", "ci_lo", "ci_hi",
    "theory", "theory_exact", "packets", "failures", "flagged",
)

PEAK_DBFS = -1.0
INT16_FULL_SCALE = 32767


def manifest_path(csv_path: Path) -> Path:
    return csv_path.with_name(f"{csv_path.stem}.manifest.json")


def sidecar_path(wav_path: Path) -> Path:
    return wav_path.with_suffix(".json")


def _prepare(path: Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"cannot create directory: {e.strerror or e}", path.parent)
    return path


# -----------------------------------------------------------------------------
# BER Results
# -----------------------------------------------------------------------------
def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _row(point: BerPoint) -> dict:
    data = point.model_dump()
    return {column: _format(data[column]) for column in CSV_COLUMNS}


def emit_results(
    report: BerReport,
    path: Path,
    profile: Optional[ModemProfile] = None,
    notes: Optional[str] = None,
) -> Path:
    """Write the CSV and its manifest; returns the manifest path"""
    path = _prepare(path)
    manifest = RunManifest(
        created_at=datetime.now(timezone.utc),
        csv_path=str(path),
        config=report.config,
        profile=profile.model_dump(mode="json") if profile else {},
        metadata=report.metadata,
        notes=notes,
    )

    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for point in report.points:
                writer.writerow(_row(point))
        manifest_path(path).write_text(manifest.model_dump_json(indent=2), encoding="utf-8")
    except OSError as e:
        raise OutputError(f"cannot write results: {e.strerror or e}", path)

    logger.info(f"Wrote {len(report.points)} points to {path}")
    return manifest_path(path)


# -----------------------------------------------------------------------------
# WAV Export
# -----------------------------------------------------------------------------
def emit_waveform(
    packet: Packet,
    path: Path,
    params: ChirpParams,
    profile_name: str = "default",
    sample_format: Literal["int16", "float32"] = "int16",
    include_bits: bool = True,
) -> WaveformMetadata:
    """Upconvert a packet, peak-normalise it to -1 dBFS and write WAV + sidecar"""
    if params.fs_passband != round(params.fs_passband):
        raise ConfigError(f"WAV sample rate must be an integer, got {params.fs_passband}")
    path = _prepare(path)

    passband = upconvert(packet.baseband, params)
    peak = float(np.max(np.abs(passband))) if passband.size else 0.0
    scale = peak / 10 ** (PEAK_DBFS / 20) if peak > 0 else 1.0

    normalised = passband / scale
    if sample_format == "int16":
        data = np.round(normalised * INT16_FULL_SCALE).astype(np.int16)
        scale /= INT16_FULL_SCALE
    else:
        data = normalised.astype(np.float32)

    k = params.bits_per_symbol
    metadata = WaveformMetadata(
        profile=profile_name,
        sample_rate_hz=int(round(params.fs_passband)),
        baseband_rate_hz=params.fs,
        carrier_frequency_hz=params.fc,
        sample_format=sample_format,
        scale=scale,
        peak_dbfs=PEAK_DBFS,
        baseband_length=int(packet.baseband.size),
        modulation_order=params.M,
        symbols_per_packet=int(packet.payload_bits.size // k),
        payload_bits="".join(str(int(b)) for b in packet.payload_bits) if include_bits else None,
    )

    try:
        wavfile.write(str(path), metadata.sample_rate_hz, data)
        sidecar_path(path).write_text(metadata.model_dump_json(indent=2), encoding="utf-8")
    except OSError as e:
        raise OutputError(f"cannot write waveform: {e.strerror or e}", path)

    logger.info(f"Wrote {data.size} {sample_format} samples at {metadata.sample_rate_hz} Hz to {path}")
    return metadata


def read_waveform(path: Path, params: ChirpParams) -> Tuple[np.ndarray, WaveformMetadata]:
    """Undo emit_waveform: rescale, downconvert and trim to the packet length"""
    path = Path(path)
    try:
        metadata = WaveformMetadata.model_validate_json(sidecar_path(path).read_text(encoding="utf-8"))
        rate, data = wavfile.read(str(path))
    except OSError as e:
        raise OutputError(f"cannot read waveform: {e.strerror or e}", path)
    except (ValueError, ValidationError) as e:
        raise OutputError(f"malformed waveform or sidecar: {e}", path)

    if rate != metadata.sample_rate_hz or rate != round(params.fs_passband):
        raise ConfigError(
            f"{path}: recorded at {rate} Hz, profile expects {params.fs_passband:g} Hz"
        )
    if data.ndim != 1:
        raise OutputError(f"expected mono audio, got {data.shape[1]} channels", path)

    passband = data.astype(np.float64) * metadata.scale
    baseband = downconvert(passband, params, metadata.carrier_frequency_hz)
    return baseband[:metadata.baseband_length], metadata
