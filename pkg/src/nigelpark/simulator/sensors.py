"""Ray-cast lidar, IPS/IMU/encoder emulation, and the seeded sensor rig."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core.geometry import AckermannCommand, Pose2
from ..core.scan import LaserScan
from .vehicle import VehicleState
from .world import World, points_in_convex_polygon


@dataclass(frozen=True)
class SensorSpec:
    """Noise and resolution figures for the emulated sensor suite."""

    n_beams: int = 360
    angle_min: float = -math.pi
    range_min: float = 0.15
    range_max: float = 6.0
    range_sigma: float = 5e-3
    ray_step_factor: float = 0.25         # march step as a fraction of map resolution
    ips_sigma: float = 1.5e-2
    ips_bound: float = 5e-2               # hard per-axis error bound
    imu_yaw_sigma: float = 5e-3
    imu_rate_sigma: float = 1e-2
    ticks_per_rev: int = 2048
    steer_feedback_quantum: float = 1e-3
    wheel_feedback_quantum: float = 1e-2

    @property
    def angle_increment(self) -> float:
        return 2.0 * math.pi / self.n_beams

    @property
    def ticks_per_rad(self) -> float:
        return self.ticks_per_rev / (2.0 * math.pi)


@dataclass(frozen=True)
class SensorFrame:
    scan: LaserScan
    ips: tuple[float, float]
    imu_yaw: float
    imu_yaw_rate: float
    encoder_ticks: int
    actuation_feedback: AckermannCommand
    stamp: float


def simulate_lidar(world: World, pose: Pose2, spec: SensorSpec,
                   rng: np.random.Generator) -> LaserScan:
    """Render one sweep by marching every beam at <= resolution/2 steps.

    A beam hits at the first sample inside an occupied ground-truth cell or
    an active obstacle polygon.  Hits get additive Gaussian range noise and
    are clipped to [range_min, range_max]; misses and sub-range_min hits
    report exactly range_max.
    """
    grid = world.static_map
    step = spec.ray_step_factor * grid.resolution

    # beams cannot usefully march beyond the farthest grid corner
    corners = grid.cell_centers(np.array([[0, 0], [grid.width, 0],
                                          [0, grid.height], [grid.width, grid.height]],
                                         dtype=np.float64))
    reach = float(np.max(np.hypot(corners[:, 0] - pose.x, corners[:, 1] - pose.y)))
    march = min(spec.range_max, reach + step)
    n_steps = int(math.ceil(march / step))
    t = step * np.arange(1, n_steps + 1)

    angles = spec.angle_min + spec.angle_increment * np.arange(spec.n_beams) + pose.yaw
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=-1)      # (n, 2)
    px = pose.x + dirs[:, 0:1] * t[None, :]                         # (n, m)
    py = pose.y + dirs[:, 1:2] * t[None, :]

    local = grid.to_grid_frame(np.stack([px.ravel(), py.ravel()], axis=-1))
    cx = np.floor(local[:, 0] / grid.resolution).astype(np.int64)
    cy = np.floor(local[:, 1] / grid.resolution).astype(np.int64)
    inside = (cx >= 0) & (cx < grid.width) & (cy >= 0) & (cy < grid.height)
    occupied = grid.occupied_mask()
    hit = np.zeros(len(cx), dtype=bool)
    hit[inside] = occupied[cy[inside], cx[inside]]
    hit = hit.reshape(spec.n_beams, n_steps)

    for poly in world.active_polygons():
        near = ((px >= poly[:, 0].min()) & (px <= poly[:, 0].max())
                & (py >= poly[:, 1].min()) & (py <= poly[:, 1].max()))
        if near.any():
            sel = np.stack([px[near], py[near]], axis=-1)
            hit[near] |= points_in_convex_polygon(sel, poly)

    any_hit = hit.any(axis=1)
    first = np.argmax(hit, axis=1)
    ranges = np.where(any_hit, t[first], spec.range_max)

    noise = rng.normal(0.0, spec.range_sigma, spec.n_beams)
    measurable = any_hit & (ranges >= spec.range_min)
    noisy = np.clip(ranges + noise, spec.range_min, spec.range_max)
    ranges = np.where(measurable, noisy, spec.range_max)

    return LaserScan(
        angle_min=spec.angle_min,
        angle_increment=spec.angle_increment,
        n_beams=spec.n_beams,
        ranges=ranges,
        range_min=spec.range_min,
        range_max=spec.range_max,
        stamp=world.clock,
    )


def _truncated_normal(rng: np.random.Generator, sigma: float, bound: float) -> float:
    if sigma <= 0.0:
        return 0.0
    while True:
        e = rng.normal(0.0, sigma)
        if abs(e) <= bound:
            return e


def _quantize(value: float, quantum: float) -> float:
    if quantum <= 0.0:
        return value
    return round(value / quantum) * quantum


@dataclass
class SensorRig:
    """Stateful sampler: owns the trial RNG stream and the encoder accumulator."""

    spec: SensorSpec
    rng: np.random.Generator
    wheelbase: float = 0.14
    _tick_accum: float = 0.0
    _last_stamp: float | None = None

    def sample(self, world: World, state: VehicleState) -> SensorFrame:
        scan = simulate_lidar(world, state.pose, self.spec, self.rng)
        ex = _truncated_normal(self.rng, self.spec.ips_sigma, self.spec.ips_bound)
        ey = _truncated_normal(self.rng, self.spec.ips_sigma, self.spec.ips_bound)
        yaw_noise = self.rng.normal(0.0, self.spec.imu_yaw_sigma) if self.spec.imu_yaw_sigma > 0 else 0.0
        rate_noise = self.rng.normal(0.0, self.spec.imu_rate_sigma) if self.spec.imu_rate_sigma > 0 else 0.0

        dt = 0.0 if self._last_stamp is None else state.stamp - self._last_stamp
        self._last_stamp = state.stamp
        self._tick_accum += state.wheel_omega * dt * self.spec.ticks_per_rad

        true_rate = state.v * math.tan(state.delta) / self.wheelbase
        return SensorFrame(
            scan=scan,
            ips=(state.pose.x + ex, state.pose.y + ey),
            imu_yaw=state.pose.yaw + yaw_noise,
            imu_yaw_rate=true_rate + rate_noise,
            encoder_ticks=int(round(self._tick_accum)),
            actuation_feedback=AckermannCommand(
                steering=_quantize(state.delta, self.spec.steer_feedback_quantum),
                wheel_velocity=_quantize(state.wheel_omega, self.spec.wheel_feedback_quantum),
            ),
            stamp=state.stamp,
        )


def sample_sensors(world: World, state: VehicleState, spec: SensorSpec,
                   rng: np.random.Generator) -> SensorFrame:
    """One-shot sensor sample with a fresh encoder accumulator."""
    return SensorRig(spec, rng).sample(world, state)
