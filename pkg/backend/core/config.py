"""core/config.py — Runtime settings via Pydantic BaseSettings.

Loads BOOT_T_* variables from .env (and the OS environment).  These are the
process-wide knobs; experiment parameters live in schemas/config.py.

Usage:
    from core.config import settings

    threads = settings.threads
    configure_logging(settings.log_level, settings.log_file)
"""

from __future__ import annotations

from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# .env lives in the project root (one level above backend/)
_ENV_FILE = Path(__file__).parent.parent.parent / ".env"


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=str(_ENV_FILE),
        env_file_encoding="utf-8",
        env_prefix="BOOT_T_",
        case_sensitive=False,
        extra="ignore",
    )

    # Worker pool: default for --threads (BOOT_T_THREADS)
    threads: int = Field(1, ge=1)

    # Logging
    log_level: str = "INFO"
    log_file: str = ""          # empty = console only

    # tqdm bars on long studies
    progress: bool = False

    # Experiments
    output_dir: str = "results"
    default_seed: int = Field(20240611, ge=0, lt=2**64)

    @field_validator("log_level", mode="before")
    @classmethod
    def _uppercase_log_level(cls, v: str) -> str:
        return v.upper()


# Singleton, import this everywhere
settings = Settings()
