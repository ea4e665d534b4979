"""Configuration settings for the accelerator co-exploration engine."""
from pathlib import Path
from typing import Optional, Tuple

from pydantic_settings import BaseSettings, SettingsConfigDict

PROJECT_ROOT = Path(__file__).resolve().parent.parent


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="DSE_",
        case_sensitive=False
    )

    # Environment
    environment: str = "development"

    # Logging
    log_level: str = "INFO"
    log_format: str = "json"
    log_file: Optional[str] = None

    # Runs
    default_seed: int = 0
    default_jobs: int = 1

    # Data documents
    oracle_params_path: Path = PROJECT_ROOT / "config" / "oracle_defaults.json"
    default_space_path: Path = PROJECT_ROOT / "config" / "spaces" / "default_space.json"
    networks_dir: Path = PROJECT_ROOT / "data" / "networks"

    # Run registry (bookkeeping only; timestamps and ids never reach output trees)
    run_registry_path: Path = Path.home() / ".cache" / "dse" / "runs.db"
    enable_run_registry: bool = True

    # Surrogate fitting
    cv_folds: int = 5
    degree_range_hw: Tuple[int, int] = (1, 5)
    degree_range_latency: Tuple[int, int] = (1, 5)
    holdout_fraction: float = 0.2
    degree_rtol: float = 0.01
    degree_atol_percent: float = 1e-6
    latency_max_rows: int = 20000

    # Co-exploration
    coexplore_n_archs: int = 1000
    coexplore_n_cfgs: int = 64
    coexplore_input_a: int = 32

    # Output tables
    float_format: str = "%.9g"


# Global settings instance
settings = Settings()
