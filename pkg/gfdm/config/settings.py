from typing import Optional

from pydantic import ConfigDict, Field, field_validator
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Application configuration with validation"""

    # Numerical Configuration
    singular_rtol: float = Field(
        default=1e-12,
        gt=0.0,
        lt=1.0,
        description="Relative sigma_min/sigma_max below which A is singular",
    )
    zf_tolerance: float = Field(
        default=1e-12,
        gt=0.0,
        lt=1.0,
        description="Default relative tolerance of the ZF receiver",
    )
    quad_limit: int = Field(
        default=200,
        ge=50,
        le=5000,
        description="Subdivision limit for adaptive quadrature",
    )

    # Sweep Configuration
    sweep_concurrency: int = Field(
        default=4,
        ge=1,
        le=64,
        description="Maximum number of grid points evaluated concurrently",
    )
    sweep_cache_size: int = Field(
        default=4096,
        ge=1,
        le=1_000_000,
        description="Maximum number of cached metric reports",
    )

    # Verification Configuration
    verify_seed: int = Field(
        default=2024, ge=0, description="Seed of the oracle suite"
    )
    verify_cases: int = Field(
        default=20,
        ge=1,
        le=500,
        description="Random configurations per oracle check",
    )

    # Sentry Configuration
    sentry_dsn: Optional[str] = Field(
        default=None, description="Sentry DSN for error reporting"
    )

    # Logging Configuration
    log_level: str = Field(default="INFO", description="Logging level")

    # Application Configuration
    app_name: str = Field(
        default="gfdm-radix2", description="Application name"
    )
    app_version: str = Field(
        default="1.0.0", description="Application version"
    )
    debug: bool = Field(default=False, description="Debug mode")

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level"""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        v_upper = v.upper()
        if v_upper not in valid_levels:
            raise ValueError(f"Log level must be one of: {valid_levels}")
        return v_upper

    model_config = ConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        env_prefix="",
        extra="ignore",
    )


# Global settings instance
settings = Settings()
