"""Reset protocols and the instantaneous phase-space reset."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .dynamics import State
from .rng import RngStream


@dataclass(frozen=True)
class NoReset:
    kind = "none"

    @property
    def literal(self) -> str:
        return "none"


@dataclass(frozen=True)
class Deterministic:
    t_r: float
    kind = "det"

    def __post_init__(self):
        if not (self.t_r > 0 and math.isfinite(self.t_r)):
            raise ValueError(f"reset period must be positive and finite, got {self.t_r}")

    @property
    def literal(self) -> str:
        return f"det:{self.t_r!r}"


@dataclass(frozen=True)
class Poisson:
    r: float
    kind = "poisson"

    def __post_init__(self):
        if not (self.r > 0 and math.isfinite(self.r)):
            raise ValueError(f"reset rate must be positive and finite, got {self.r}")

    @property
    def theta(self) -> float:
        """Mean interval between resets."""
        return 1.0 / self.r

    @property
    def literal(self) -> str:
        return f"poisson:{self.r!r}"


ResetSchedule = Union[NoReset, Deterministic, Poisson]


def parse_schedule(text: str) -> ResetSchedule:
    """Parse ``none``, ``det:<t_r>`` or ``poisson:<r>``."""
    s = text.strip().lower()
    if s == "none":
        return NoReset()
    kind, sep, value = s.partition(":")
    if not sep:
        raise ValueError(f"bad reset schedule {text!r}; expected none, det:T or poisson:R")
    try:
        num = float(value)
    except ValueError:
        raise ValueError(f"bad number in reset schedule {text!r}") from None
    if kind == "det":
        return Deterministic(num)
    if kind == "poisson":
        return Poisson(num)
    raise ValueError(f"unknown reset kind {kind!r} in {text!r}")


@dataclass(frozen=True)
class ResetPoint:
    x_r: float
    v_r: float = 0.0

    def __post_init__(self):
        if self.v_r != 0.0:
            raise ValueError("resets always restore zero velocity")


def next_reset_time(sched: ResetSchedule, now: float, rng: RngStream | None = None) -> float | None:
    if now < 0:
        raise ValueError("now must be non-negative")
    if isinstance(sched, NoReset):
        return None
    if isinstance(sched, Deterministic):
        return now + sched.t_r
    if isinstance(sched, Poisson):
        if rng is None:
            raise ValueError("Poisson schedule needs a random stream")
        return now + rng.exponential(sched.r)
    raise TypeError(f"unknown schedule {sched!r}")


def apply_reset(s: State, p: ResetPoint) -> State:
    return State(p.x_r, 0.0, s.t)


def schedule_code(sched: ResetSchedule) -> tuple[int, float]:
    """(kind code, parameter) pair handed to the kernels."""
    if isinstance(sched, NoReset):
        return 0, 0.0
    if isinstance(sched, Deterministic):
        return 1, float(sched.t_r)
    if isinstance(sched, Poisson):
        return 2, float(sched.r)
    raise TypeError(f"unknown schedule {sched!r}")
