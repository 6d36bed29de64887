from functools import lru_cache
from pathlib import Path

from pydantic import field_validator
from pydantic_settings import BaseSettings

DEFAULT_CONFIG_FILE = str(Path(__file__).with_name("default_config.toml"))


class Settings(BaseSettings):
    # Logging
    LOG_LEVEL: str = "INFO"

    # Output
    OUTPUT_DIR: str = "results"
    CSV_PRECISION: int = 17
    SHOW_PROGRESS: bool = True

    # Run configuration
    CONFIG_FILE: str = DEFAULT_CONFIG_FILE

    # Solver
    NEWTON_MAX_ITER: int = 20

    @field_validator('LOG_LEVEL', mode='before')
    @classmethod
    def normalize_log_level(cls, v):
        if isinstance(v, str):
            return v.strip().upper()
        return v

    @field_validator('CSV_PRECISION', 'NEWTON_MAX_ITER')
    @classmethod
    def check_positive(cls, v):
        if v < 1:
            raise ValueError(f"Value must be at least 1, got {v}")
        return v

    class Config:
        env_file = ".env"
        case_sensitive = True


@lru_cache()
def get_settings():
    return Settings()
