"""
Configuration management for the discount term-structure engine.

Loads settings from (highest priority first):
1. keyword arguments
2. environment variables prefixed DISCOUNT_TS_ (e.g. DISCOUNT_TS_THREADS)
3. .env file
4. config/default.yaml (base config)

Model configurations for the CLI are separate JSON files, see cli/schemas.py.
"""

from pathlib import Path

from pydantic import Field, ValidationError
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    YamlConfigSettingsSource,
)

from src.core import constants
from src.core.exceptions import ConfigError


# Project root folder path
PROJECT_ROOT = Path(__file__).resolve().parent.parent.parent
CONFIG_PATH = PROJECT_ROOT / "config" / "default.yaml"


class Settings(BaseSettings):
    """Engine settings with type validation."""

    model_config = SettingsConfigDict(
        env_prefix="DISCOUNT_TS_",
        env_file=".env",
        yaml_file=CONFIG_PATH,
        extra="ignore",
    )

    # App Settings
    app_name: str = constants.APP_NAME
    app_version: str = constants.APP_VERSION

    # Logging
    log_level: str = "INFO"
    log_file: str = str(PROJECT_ROOT / "logs" / "discount_ts.log")

    # Parallelism; None means one worker per CPU
    threads: int | None = Field(default=None, ge=1)
    block_size: int = Field(default=constants.DEFAULT_BLOCK_SIZE, ge=1)

    # Numerics
    default_dt: float = Field(default=constants.DEFAULT_DT, gt=0)
    h_max: float = Field(default=constants.DEFAULT_H_MAX, gt=0)
    fd_step: float = Field(default=constants.FD_STEP, gt=0)
    simplex_ceiling: float = Field(default=constants.SIMPLEX_CEILING, gt=0, le=1)

    # Validation
    tolerance_multiplier: float = Field(default=constants.TOLERANCE_MULTIPLIER, gt=0)
    deterministic_tolerance: float = Field(default=constants.DETERMINISTIC_TOLERANCE, ge=0)

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return (
            init_settings,
            env_settings,
            dotenv_settings,
            YamlConfigSettingsSource(settings_cls),
        )


_settings: Settings | None = None


def get_settings() -> Settings:
    """Get engine settings (built once, then reused)."""
    global _settings
    if _settings is None:
        try:
            _settings = Settings()
        except ValidationError as e:
            raise ConfigError(f"invalid engine settings: {e}") from e
    return _settings


def reset_settings() -> None:
    """Drop the cached settings so the next call re-reads env and YAML."""
    global _settings
    _settings = None
