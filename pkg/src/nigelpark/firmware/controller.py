"""Low-level control: wheel-velocity PID and steering command shaping."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from ..core.geometry import AckermannCommand
from .types import FirmwareConfig, FirmwareState, FirmwareOutputs


def velocity_controller_step(target: float, measured: float, cfg: FirmwareConfig,
                             state: FirmwareState) -> tuple[float, FirmwareState]:
    """Positional PID producing a normalized drive effort in [-1, 1].

    The integrator is clamped to i_clamp and frozen while the output is
    saturated in the error's direction (conditional anti-windup).
    """
    if not (math.isfinite(target) and math.isfinite(measured)):
        raise ValueError("controller inputs must be finite")
    dt = 1.0 / cfg.loop_rate
    err = target - measured
    derr = 0.0 if state.tick == 0 else (err - state.prev_err) / dt

    provisional = cfg.kp * err + cfg.ki * state.integ + cfg.kd * derr
    saturated_same_direction = (provisional > 1.0 and err > 0.0) or (
        provisional < -1.0 and err < 0.0)
    if saturated_same_direction:
        integ = state.integ
    else:
        integ = max(-cfg.i_clamp, min(cfg.i_clamp, state.integ + err * dt))

    effort = cfg.kp * err + cfg.ki * integ + cfg.kd * derr
    effort = max(-1.0, min(1.0, effort))
    return effort, replace(state, integ=integ, prev_err=err)


def steering_controller_step(target: float, cfg: FirmwareConfig,
                             state: FirmwareState) -> float:
    """Servo position command: the saturated steering target.

    The plant's lag and rate limit supply the dynamics; closed-loop tracking
    error must settle within 3e-2 rad.
    """
    if not math.isfinite(target):
        raise ValueError("steering target must be finite")
    return max(-cfg.steer_cmd_limit, min(cfg.steer_cmd_limit, target))


def run_firmware_cycle(frame, setpoint: AckermannCommand, cfg: FirmwareConfig,
                       state: FirmwareState) -> tuple[FirmwareOutputs, FirmwareState]:
    """One control tick: compose both controllers, echo feedback, handle staleness.

    A frame older than stale_after periods raises the fault flag; the last
    command is held, and once staleness exceeds the hold window the velocity
    command is zeroed (safe stop).
    """
    period = 1.0 / cfg.loop_rate
    cycle_time = state.tick * period
    age = cycle_time - frame.stamp

    if age > cfg.stale_after * period + 1e-12:
        if age > 2.0 * cfg.stale_after * period + 1e-12:
            command = AckermannCommand(state.last_cmd.steering, 0.0)
        else:
            command = state.last_cmd
        outputs = FirmwareOutputs(command=command, effort=state.last_effort,
                                  feedback_echo=frame.actuation_feedback, fault=True)
        return outputs, replace(state, tick=state.tick + 1, last_cmd=command)

    effort, state = velocity_controller_step(
        setpoint.wheel_velocity, frame.actuation_feedback.wheel_velocity, cfg, state)
    steer_cmd = steering_controller_step(setpoint.steering, cfg, state)
    command = AckermannCommand(steer_cmd, effort * cfg.vel_cmd_limit)
    outputs = FirmwareOutputs(command=command, effort=effort,
                              feedback_echo=frame.actuation_feedback, fault=False)
    state = replace(state, tick=state.tick + 1, last_cmd=command, last_effort=effort)
    return outputs, state
