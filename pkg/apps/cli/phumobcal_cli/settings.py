# apps/cli/phumobcal_cli/settings.py
from __future__ import annotations

from pathlib import Path

from pydantic import Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from phumobcal_core.shared.errors import ConfigError


class CliSettings(BaseSettings):
    """
    Process-level settings from environment variables and (in local dev) a .env file.

      - PHUMOBCAL_OUTPUT_ROOT: artifact directory when neither --out nor output_dir is given
      - LOG_LEVEL: logging level name (default INFO)
    """

    output_root: Path = Field(default=Path("runs"), alias="PHUMOBCAL_OUTPUT_ROOT")
    log_level: str = Field(default="INFO", alias="LOG_LEVEL")

    model_config = SettingsConfigDict(
        env_file=".env",
        extra="ignore",
        case_sensitive=False,
    )


def load_cli_settings() -> CliSettings:
    """
    Load and validate CLI settings. Raises a ConfigError with a readable message on failure.
    """
    try:
        return CliSettings()
    except ValidationError as exc:
        raise ConfigError(f"Invalid CLI environment: {exc}") from exc
