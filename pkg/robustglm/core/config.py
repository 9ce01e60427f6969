"""Library settings: env-driven, cached, no surprises."""

from __future__ import annotations

import os
from functools import lru_cache
from pathlib import Path

from pydantic import Field, PositiveFloat, PositiveInt
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="ROBUSTGLM_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # app
    APP_NAME: str = "robustglm"
    VERSION: str = "0.1.0"

    # logs: stderr only, stdout belongs to documents and CSV
    LOG_LEVEL: str = "WARNING"
    LOG_JSON: bool = False

    # worker pool; ROBUSTGLM_THREADS, None means available parallelism
    THREADS: PositiveInt | None = None

    # estimator defaults, each one overridable per call / per CLI flag
    BISQUARE_C: PositiveFloat = 2.0
    ALPHA: float = Field(default=0.05, gt=0.0, lt=0.5)
    TOL: PositiveFloat = 1e-8
    MAX_ITER: PositiveInt = 100
    SUBSAMPLES: PositiveInt = 2500

    # m-table grid
    MTABLE_MU_MIN: PositiveFloat = 1e-3
    MTABLE_MU_MAX: PositiveFloat = 1e5
    MTABLE_NODES: int = Field(default=400, ge=400)
    MTABLE_CACHE_DIR: Path | None = None

    @property
    def threads(self) -> int:
        return self.THREADS or os.cpu_count() or 1


@lru_cache
def get_settings() -> Settings:
    return Settings()
