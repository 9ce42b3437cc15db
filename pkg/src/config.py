"""
Application configuration with environment variable loading
"""
from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Simulator settings loaded from environment variables (prefix QBM_)"""

    # Integrator
    rtol: float = Field(default=1e-8, gt=0)
    atol: float = Field(default=1e-9, gt=0)
    integrator: Literal["RK45", "DOP853"] = "DOP853"
    classical_rtol: float = Field(default=1e-10, gt=0)
    classical_atol: float = Field(default=1e-12, gt=0)

    # qutip solver method and step budget for sesolve/mesolve/mcsolve
    quantum_method: Literal["adams", "bdf", "lsoda", "dop853", "vern7", "vern9"] = "adams"
    nsteps: int = Field(default=100_000, ge=1)

    # Max |1 - <psi|psi>| accepted from a closed-system integration
    norm_tolerance: float = Field(default=1e-6, gt=0)

    # Truncation guard: max population in the top two Fock levels of any mode
    leakage_tolerance: float = Field(default=1e-4, gt=0, lt=1)

    # Task-level parallelism for trajectories and benchmark instances
    max_workers: int = Field(default=1, ge=1)

    # Output
    output_dir: str = "results"
    log_level: str = "INFO"
    master_seed: int = Field(default=20180101, ge=0)

    # Wigner grids
    wigner_extent: float = Field(default=4.5, gt=0)
    wigner_resolution: int = Field(default=101, ge=3)

    model_config = SettingsConfigDict(
        env_prefix="QBM_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    """
    Get cached settings instance (singleton pattern)

    Returns:
        Settings instance
    """
    return Settings()
