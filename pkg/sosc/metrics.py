# User value: This file tracks how many clusters were created or merged and how long steps take, per run.
from __future__ import annotations

import logging
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator

logger = logging.getLogger("sosc.metrics")
_LOCK = threading.Lock()


@dataclass
class TimerStats:
    count: int = 0
    sum_ms: float = 0.0
    min_ms: float = float("inf")
    max_ms: float = 0.0

    def add(self, value_ms: float) -> None:
        self.count += 1
        self.sum_ms += value_ms
        self.min_ms = min(self.min_ms, value_ms)
        self.max_ms = max(self.max_ms, value_ms)

    def to_dict(self) -> dict[str, float]:
        return {
            "count": float(self.count),
            "sum_ms": self.sum_ms,
            "min_ms": self.min_ms,
            "max_ms": self.max_ms,
            "mean_ms": self.sum_ms / self.count,
        }


_COUNTERS: dict[str, int] = {}
_TIMERS: dict[str, TimerStats] = {}


def _key(name: str, tags: dict) -> str:
    parts = [f"{k}={v}" for k, v in sorted(tags.items()) if v not in (None, "")]
    return "|".join([name, *parts])


# User value: counts events such as new clusters so a fit summary can report them.
def incr(name: str, amount: int = 1, **tags) -> None:
    key = _key(name, tags)
    with _LOCK:
        total = _COUNTERS[key] = _COUNTERS.get(key, 0) + int(amount)
    logger.debug("metric_counter_update", extra={"metric_name": key, "metric_type": "counter", "total": total})


# User value: aggregates step timings without storing every sample of a long stream.
def observe_ms(name: str, duration_ms: float, **tags) -> None:
    key = _key(name, tags)
    value = max(0.0, float(duration_ms))
    with _LOCK:
        _TIMERS.setdefault(key, TimerStats()).add(value)
    logger.debug("metric_timer_observe", extra={"metric_name": key, "metric_type": "timer_ms", "value_ms": value})


@contextmanager
def timed(name: str, **tags) -> Iterator[None]:
    started = time.perf_counter()
    try:
        yield
    finally:
        observe_ms(name, (time.perf_counter() - started) * 1000.0, **tags)


def snapshot() -> dict:
    with _LOCK:
        return {
            "counters": dict(_COUNTERS),
            "timers_ms": {key: stats.to_dict() for key, stats in _TIMERS.items()},
        }


def reset() -> None:
    with _LOCK:
        _COUNTERS.clear()
        _TIMERS.clear()
