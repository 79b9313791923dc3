"""Exponential back-off after failed CAS attempts.

The delay for the n-th entry (counted from 0) within one operation is
``base * actors * 2**n`` units, capped at ``cap``. State is per invocation and
never shared between actors.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

__all__ = ["BackoffConfig", "BackoffState", "DEFAULT_BACKOFF", "NO_BACKOFF"]

_MODES = ("spin", "sleep", "none")


@dataclass(frozen=True)
class BackoffConfig:
    base: int = 1
    cap: int = 64
    actors: int = 1
    mode: str = "sleep"
    unit: float = 1e-6  # seconds per delay unit in "sleep" mode

    def __post_init__(self) -> None:
        if self.mode not in _MODES:
            raise ValueError(f"backoff mode must be one of {_MODES}")
        if self.base < 0 or self.cap < 0 or self.actors < 1:
            raise ValueError("backoff base/cap must be >= 0 and actors >= 1")


DEFAULT_BACKOFF = BackoffConfig()
NO_BACKOFF = BackoffConfig(base=0, cap=0, mode="none")


class BackoffState:
    __slots__ = ("config", "entries")

    def __init__(self, config: BackoffConfig = DEFAULT_BACKOFF) -> None:
        self.config = config
        self.entries = 0

    def reset(self) -> None:
        self.entries = 0

    def next_delay(self) -> int:
        c = self.config
        delay = min(c.base * c.actors << min(self.entries, 32), c.cap)
        self.entries += 1
        return delay

    def pause(self, delay: int) -> None:
        mode = self.config.mode
        if delay <= 0 or mode == "none":
            return
        if mode == "sleep":
            time.sleep(delay * self.config.unit)
        else:
            for _ in range(delay):
                pass
