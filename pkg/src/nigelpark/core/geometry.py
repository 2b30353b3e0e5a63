"""Planar rigid-body types and transform primitives shared by every stage."""

from __future__ import annotations

import math
from dataclasses import dataclass

TAU = 2.0 * math.pi


def normalize_angle(a: float) -> float:
    """Wrap an angle to the half-open interval (-pi, pi]."""
    if not math.isfinite(a):
        raise ValueError(f"angle must be finite, got {a!r}")
    r = math.remainder(a, TAU)
    if r <= -math.pi:
        r += TAU
    return r


@dataclass(frozen=True)
class Pose2:
    """Pose (x, y, yaw) in meters/radians; yaw is kept normalized to (-pi, pi]."""

    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.yaw)):
            raise ValueError("Pose2 fields must be finite")
        object.__setattr__(self, "yaw", normalize_angle(self.yaw))

    @property
    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)


def compose(a: Pose2, b: Pose2) -> Pose2:
    """Apply transform a to b (b expressed in a's frame), a.k.a. a ⊕ b."""
    c, s = math.cos(a.yaw), math.sin(a.yaw)
    return Pose2(a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y, a.yaw + b.yaw)


def inverse(p: Pose2) -> Pose2:
    """Inverse transform: compose(p, inverse(p)) is the identity pose."""
    c, s = math.cos(p.yaw), math.sin(p.yaw)
    return Pose2(-(c * p.x + s * p.y), s * p.x - c * p.y, -p.yaw)


def between(a: Pose2, b: Pose2) -> Pose2:
    """Relative pose of b expressed in a's frame: inverse(a) ⊕ b."""
    return compose(inverse(a), b)


@dataclass(frozen=True)
class Twist2:
    """Body-frame velocity command: signed forward speed and yaw rate."""

    v: float = 0.0
    omega: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.v) and math.isfinite(self.omega)):
            raise ValueError("Twist2 fields must be finite")


@dataclass(frozen=True)
class AckermannCommand:
    """Low-level actuation target: front-wheel angle and rear-wheel angular rate."""

    steering: float = 0.0
    wheel_velocity: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.steering) and math.isfinite(self.wheel_velocity)):
            raise ValueError("AckermannCommand fields must be finite")


@dataclass(frozen=True)
class VehicleParams:
    """Geometry and actuation limits of the scaled car-like vehicle.

    The footprint is a rectangle of ``length`` x ``width`` whose center sits
    ``footprint_offset_x`` ahead of the rear axle (the pose reference point).
    """

    wheelbase: float = 0.14
    track: float = 0.10
    wheel_radius: float = 0.03
    delta_max: float = 0.52
    v_max: float = 0.5
    a_max: float = 1.0
    steer_rate_max: float = 4.0
    steer_tau: float = 0.08
    drive_tau: float = 0.15
    length: float = 0.25
    width: float = 0.16
    footprint_offset_x: float = 0.075

    def __post_init__(self) -> None:
        positive = (
            self.wheelbase, self.track, self.wheel_radius, self.delta_max, self.v_max,
            self.a_max, self.steer_rate_max, self.steer_tau, self.drive_tau,
            self.length, self.width,
        )
        if any(not math.isfinite(v) or v <= 0.0 for v in positive):
            raise ValueError("VehicleParams fields must be finite and strictly positive")
        if self.delta_max >= math.pi / 2:
            raise ValueError("delta_max must be below pi/2")

    @property
    def kappa_max(self) -> float:
        """Curvature bound tan(delta_max) / wheelbase."""
        return math.tan(self.delta_max) / self.wheelbase

    @property
    def wheel_omega_max(self) -> float:
        return self.v_max / self.wheel_radius

    def footprint(self) -> list[tuple[float, float]]:
        """Footprint corners in the body frame, counter-clockwise."""
        cx = self.footprint_offset_x
        hl, hw = 0.5 * self.length, 0.5 * self.width
        return [(cx - hl, -hw), (cx + hl, -hw), (cx + hl, hw), (cx - hl, hw)]
