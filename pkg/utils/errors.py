from __future__ import annotations

from pathlib import Path
from typing import Optional


# -----------------------------------------------------------------------------
# Base Error
# -----------------------------------------------------------------------------
class ModemError(Exception):
    """Base error for the modem. Carries a detail message and a CLI exit code."""

    exit_code: int = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


# -----------------------------------------------------------------------------
# Configuration (exit code 2)
# -----------------------------------------------------------------------------
class ConfigError(ModemError, ValueError):
    """Invalid waveform, frame, channel or sweep configuration"""

    exit_code = 2


class SymbolRangeError(ModemError, ValueError):
    """Symbol index or bit label outside the modulation alphabet"""

    exit_code = 2


# -----------------------------------------------------------------------------
# Receiver (exit code 3)
# -----------------------------------------------------------------------------
class ReceiverError(ModemError):
    """A packet could not be received"""

    exit_code = 3


class NoPacketFound(ReceiverError):
    pass


class ChannelEstimationError(ReceiverError):
    pass


class DetectionError(ReceiverError):
    pass


# -----------------------------------------------------------------------------
# I/O (exit code 4)
# -----------------------------------------------------------------------------
class OutputError(ModemError):
    """Reading or writing an artifact failed"""

    exit_code = 4

    def __init__(self, detail: str, path: Optional[Path] = None):
        if path is not None:
            detail = f"{path}: {detail}"
        super().__init__(detail)
        self.path = path
