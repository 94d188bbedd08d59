from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class _LoggingSettings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", env_prefix="SIGSURV_LOG_", extra="ignore")

    level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "INFO"

    @field_validator("level", mode="before")
    @classmethod
    def upper_case_level(cls, v: str) -> str:
        return v.upper() if isinstance(v, str) else v


class _RuntimeSettings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", env_prefix="SIGSURV_", extra="ignore")

    n_jobs: int = 1
    out_dir: Path = Path("sigsurv_runs")

    @field_validator("n_jobs")
    @classmethod
    def check_n_jobs(cls, v: int) -> int:
        if v == 0 or v < -1:
            raise ValueError(f"n_jobs must be a positive integer or -1 (all cores), got {v}.")

        return v


class Settings(BaseModel):
    logging: _LoggingSettings = Field(default_factory=_LoggingSettings)
    runtime: _RuntimeSettings = Field(default_factory=_RuntimeSettings)


settings = Settings()
