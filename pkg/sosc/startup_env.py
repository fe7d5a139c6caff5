# User value: This file rejects bad environment overrides up front instead of failing halfway through a long fit.
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass
from typing import Callable, List

from sosc.error_catalog import ConfigError

logger = logging.getLogger("sosc.startup")

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


@dataclass(frozen=True)
class NumericEnv:
    """Range rule for one numeric override; ``low_open`` excludes the lower bound."""

    key: str
    kind: Callable[[str], float]
    low: float
    high: float | None = None
    low_open: bool = False

    def check(self, raw: str, errors: List[str]) -> None:
        noun = "an integer" if self.kind is int else "a number"
        try:
            value = self.kind(raw)
        except ValueError:
            errors.append(f"{self.key} must be {noun}")
            return
        if not math.isfinite(value):
            errors.append(f"{self.key} must be finite")
        elif value < self.low or (self.low_open and value == self.low):
            errors.append(f"{self.key} must be {'>' if self.low_open else '>='} {self.low}")
        elif self.high is not None and value > self.high:
            errors.append(f"{self.key} must be <= {self.high}")


NUMERIC_ENV = (
    NumericEnv("SOSC_CONTROL_DT", float, 0.0, 1.0, low_open=True),
    NumericEnv("SOSC_CONTROL_R", float, 0.0, low_open=True),
    NumericEnv("SOSC_S_MAX", int, 1, 10000),
    NumericEnv("SOSC_WORKERS", int, 1, 64),
)


def _raw(key: str) -> str | None:
    value = os.getenv(key)
    if value is None or not value.strip():
        return None
    return value.strip()


# User value: reports every invalid override at once so users fix their .env in one pass.
def validate_startup_env() -> None:
    errors: List[str] = []

    level = _raw("SOSC_LOG_LEVEL")
    if level is not None and level.upper() not in LOG_LEVELS:
        errors.append(f"SOSC_LOG_LEVEL must be one of {list(LOG_LEVELS)}")
    for rule in NUMERIC_ENV:
        raw = _raw(rule.key)
        if raw is not None:
            rule.check(raw, errors)

    if errors:
        for err in errors:
            logger.error("startup_env_invalid %s", err)
        raise ConfigError("Startup env validation failed: " + "; ".join(errors))
    logger.debug("startup_env_validated keys=%s", [rule.key for rule in NUMERIC_ENV])


def env_float(key: str, default: float) -> float:
    raw = _raw(key)
    return float(default) if raw is None else float(raw)


def env_int(key: str, default: int) -> int:
    raw = _raw(key)
    return int(default) if raw is None else int(raw)
