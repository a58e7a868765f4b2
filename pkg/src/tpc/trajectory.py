"""Fast-start quadratic target trajectory N*(t)."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import GovernorConfig


def round_half_away(value: float) -> int:
    """Round to nearest integer, ties away from zero (Python's round() is banker's)."""
    return int(math.copysign(math.floor(abs(value) + 0.5), value))


def ease(x: float) -> float:
    """Quadratic fast-start easing ``2x - x**2`` on [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"ease() domain is [0, 1], got {x!r}")
    return x * (2.0 - x)


@dataclass(frozen=True)
class TargetSchedule:
    initial_count: int
    target_count: int
    t_start: int
    t_stop: int

    def __post_init__(self) -> None:
        if self.t_start >= self.t_stop:
            raise ValueError(f"empty schedule window [{self.t_start}, {self.t_stop}]")

    @classmethod
    def from_config(cls, cfg: GovernorConfig) -> "TargetSchedule":
        return cls(cfg.initial_count, cfg.target_count, cfg.densify_from, cfg.densify_until)

    def progress(self, t: int) -> float:
        x = (t - self.t_start) / (self.t_stop - self.t_start)
        return min(1.0, max(0.0, x))

    def __call__(self, t: int) -> int:
        return target_count(self, t)


def target_count(sched: TargetSchedule, t: int) -> int:
    if t <= sched.t_start:
        return sched.initial_count
    if t >= sched.t_stop:
        return sched.target_count
    s = ease(sched.progress(t))
    return round_half_away(sched.initial_count + s * (sched.target_count - sched.initial_count))
