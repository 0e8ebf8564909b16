"""Runtime configuration read from the environment (and a .env file, if present).

Recognised variables:
    YAMABOUND_PRECISION_BITS  working precision of certified intervals (default 256)
    YAMABOUND_DIGITS          significant digits of printed values (default 10)
    YAMABOUND_WORKERS         processes used by scans (default: CPU count)
    YAMABOUND_LOG_LEVEL       logging level name (default WARNING)
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from typing import Mapping, Optional

from dotenv import load_dotenv

from exactnum import MIN_PRECISION


def _int_var(env: Mapping[str, str], name: str, default: int, minimum: int) -> int:
    raw = env.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


@dataclass
class Settings:
    """Defaults for the command line; flags override every field."""

    precision_bits: int = 256
    sig_digits: int = 10
    workers: int = 1
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls, env: Optional[Mapping[str, str]] = None, dotenv: bool = True) -> "Settings":
        if env is None:
            if dotenv:
                load_dotenv()
            env = os.environ
        level = env.get("YAMABOUND_LOG_LEVEL", "WARNING").upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"YAMABOUND_LOG_LEVEL is not a logging level: {level!r}")
        return cls(
            precision_bits=_int_var(env, "YAMABOUND_PRECISION_BITS", 256, MIN_PRECISION),
            sig_digits=_int_var(env, "YAMABOUND_DIGITS", 10, 1),
            workers=_int_var(env, "YAMABOUND_WORKERS", os.cpu_count() or 1, 1),
            log_level=level,
        )
