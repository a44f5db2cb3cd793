# config.py
"""Process-level defaults read from the environment (and a local .env file)."""

import os
from dataclasses import dataclass

from dotenv import load_dotenv

load_dotenv()


def _int_env(name: str, default: int, minimum: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError as e:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from e
    if value < minimum:
        raise ValueError(f"{name} must be at least {minimum}, got {value}")
    return value


@dataclass(frozen=True)
class Settings:
    jobs: int
    log_level: str
    seed: int


def get_settings() -> Settings:
    """Read POUW_JOBS, POUW_LOG_LEVEL and POUW_SEED."""
    return Settings(
        jobs=_int_env("POUW_JOBS", 1, 1),
        log_level=os.getenv("POUW_LOG_LEVEL", "WARNING").upper(),
        seed=_int_env("POUW_SEED", 0, 0),
    )
