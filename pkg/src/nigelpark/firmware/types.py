"""Firmware configuration and per-tick state."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..core.geometry import AckermannCommand


@dataclass(frozen=True)
class FirmwareConfig:
    kp: float = 0.8
    ki: float = 1.2
    kd: float = 0.0
    i_clamp: float = 2.0
    loop_rate: float = 50.0
    steer_cmd_limit: float = 0.52
    vel_cmd_limit: float = 50.0 / 3.0   # rad/s; effort * limit = wheel-rate command
    stale_after: int = 3                # periods before a frame counts as stale

    def __post_init__(self) -> None:
        if self.loop_rate <= 0:
            raise ValueError("loop_rate must be positive")
        if not all(math.isfinite(v) for v in (self.kp, self.ki, self.kd)):
            raise ValueError("PID gains must be finite")
        if self.i_clamp < 0:
            raise ValueError("i_clamp must be nonnegative")


@dataclass(frozen=True)
class FirmwareState:
    integ: float = 0.0
    prev_err: float = 0.0
    last_cmd: AckermannCommand = field(default_factory=AckermannCommand)
    last_effort: float = 0.0
    tick: int = 0


@dataclass(frozen=True)
class FirmwareOutputs:
    command: AckermannCommand
    effort: float
    feedback_echo: AckermannCommand
    fault: bool
