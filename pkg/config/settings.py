import os
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings"""

    APP_NAME: str = "ockmodem"
    APP_VERSION: str = "1.0.0"
    ENVIRONMENT: str = "development"

    # Profiles
    PROFILE_DIR: Path = Path(__file__).resolve().parent / "profiles"
    DEFAULT_PROFILE: str = "default"

    # Artifacts (CSV, manifests, WAV)
    OUTPUT_DIR: Path = Path("results")

    # Monte Carlo execution; 0 workers means available parallelism
    WORKERS: int = 0
    BATCH_PACKETS: int = 64

    # When true, `sweep` refuses to run without an explicit --seed
    CI_MODE: bool = False

    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    def resolved_workers(self) -> int:
        if self.WORKERS > 0:
            return self.WORKERS
        return os.cpu_count() or 1


settings = Settings()
