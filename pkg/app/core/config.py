from pydantic_settings import BaseSettings
from functools import lru_cache


class Settings(BaseSettings):
    # Storage: dense arrays above this many entries must be sparse
    TENSOR_DENSE_CAP: int = 1_000_000

    # Products and powers refuse to build more entries than this
    TENSOR_ENTRY_CAP: int = 10_000_000

    # Circuit enumeration
    CIRCUIT_CAP: int = 100_000
    BRUALDI_MAX_DENSE_N: int = 12

    # Oracle
    POWER_TOL: float = 1e-10
    POWER_MAX_ITER: int = 10_000
    ABERTH_MAX_SWEEPS: int = 500

    # Region membership
    INCLUSION_SLACK: float = 1e-9

    LOG_LEVEL: str = "WARNING"

    class Config:
        env_file = ".env"


@lru_cache()
def get_settings() -> Settings:
    return Settings()
