"""Kinematic bicycle plant with first-order actuator lags."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..core.geometry import AckermannCommand, Pose2, VehicleParams, normalize_angle


@dataclass(frozen=True)
class VehicleState:
    """Plant state; v and wheel_omega are rigidly coupled through wheel_radius."""

    pose: Pose2
    v: float = 0.0
    delta: float = 0.0
    wheel_omega: float = 0.0
    stamp: float = 0.0


def _bicycle_rk4(x: float, y: float, yaw: float, v: float, delta: float,
                 wheelbase: float, dt: float) -> tuple[float, float, float]:
    # v and delta are held constant over dt (zero-order hold), so only the
    # pose ODE xdot = v cos, ydot = v sin, yawdot = v tan(delta)/L is integrated.
    k = v * math.tan(delta) / wheelbase

    def deriv(yaw_i: float) -> tuple[float, float, float]:
        return (v * math.cos(yaw_i), v * math.sin(yaw_i), k)

    d1 = deriv(yaw)
    d2 = deriv(yaw + 0.5 * dt * d1[2])
    d3 = deriv(yaw + 0.5 * dt * d2[2])
    d4 = deriv(yaw + dt * d3[2])
    x += dt / 6.0 * (d1[0] + 2 * d2[0] + 2 * d3[0] + d4[0])
    y += dt / 6.0 * (d1[1] + 2 * d2[1] + 2 * d3[1] + d4[1])
    yaw += dt / 6.0 * (d1[2] + 2 * d2[2] + 2 * d3[2] + d4[2])
    return x, y, yaw


def step_vehicle(state: VehicleState, cmd: AckermannCommand, params: VehicleParams,
                 dt: float) -> VehicleState:
    """Advance the plant by dt seconds under a zero-order-held command.

    Steering and drive respond through first-order lags (exact discrete
    update), additionally limited by steer_rate_max and a_max; the pose is
    integrated with RK4 using the post-update actuator values.
    """
    if dt <= 0 or not math.isfinite(dt):
        raise ValueError("dt must be positive and finite")
    if not (math.isfinite(cmd.steering) and math.isfinite(cmd.wheel_velocity)):
        raise ValueError("command must be finite")

    steer_target = max(-params.delta_max, min(params.delta_max, cmd.steering))
    delta = state.delta + (1.0 - math.exp(-dt / params.steer_tau)) * (steer_target - state.delta)
    max_dd = params.steer_rate_max * dt
    delta = state.delta + max(-max_dd, min(max_dd, delta - state.delta))
    delta = max(-params.delta_max, min(params.delta_max, delta))

    v_target = cmd.wheel_velocity * params.wheel_radius
    v_target = max(-params.v_max, min(params.v_max, v_target))
    v = state.v + (1.0 - math.exp(-dt / params.drive_tau)) * (v_target - state.v)
    max_dv = params.a_max * dt
    v = state.v + max(-max_dv, min(max_dv, v - state.v))
    v = max(-params.v_max, min(params.v_max, v))

    x, y, yaw = _bicycle_rk4(state.pose.x, state.pose.y, state.pose.yaw,
                             v, delta, params.wheelbase, dt)
    return VehicleState(
        pose=Pose2(x, y, normalize_angle(yaw)),
        v=v,
        delta=delta,
        wheel_omega=v / params.wheel_radius,
        stamp=state.stamp + dt,
    )
