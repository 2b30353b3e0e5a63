"""Ground-truth world: static occupancy map plus scripted convex obstacles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from ..core.geometry import Pose2, normalize_angle
from ..core.grid import OccupancyGrid
from ..core.polygons import (
    cell_square,
    convex_polygons_intersect,
    points_in_convex_polygon,
    transform_polygon,
)


class ContractViolationError(RuntimeError):
    """Raised when a caller breaks a stated call-order contract."""


@dataclass(frozen=True)
class DynamicObstacle:
    """Convex polygon following timed waypoints inside an activity window."""

    name: str
    shape: np.ndarray              # body-frame vertices (k, 2), CCW
    waypoints: tuple[tuple[float, Pose2], ...]
    active_from: float = 0.0
    active_until: float = math.inf

    def __post_init__(self) -> None:
        times = [t for t, _ in self.waypoints]
        if not times:
            raise ValueError("obstacle needs at least one waypoint")
        if any(t1 >= t2 for t1, t2 in zip(times, times[1:])):
            raise ValueError("waypoint times must be strictly increasing")

    def active(self, t: float) -> bool:
        return self.active_from <= t <= self.active_until

    def pose_at(self, t: float) -> Pose2:
        """Interpolated pose: linear position, shortest-arc yaw, clamped ends."""
        wps = self.waypoints
        if t <= wps[0][0]:
            return wps[0][1]
        if t >= wps[-1][0]:
            return wps[-1][1]
        for (t0, p0), (t1, p1) in zip(wps, wps[1:]):
            if t0 <= t <= t1:
                u = (t - t0) / (t1 - t0)
                dyaw = normalize_angle(p1.yaw - p0.yaw)
                return Pose2(
                    p0.x + u * (p1.x - p0.x),
                    p0.y + u * (p1.y - p0.y),
                    p0.yaw + u * dyaw,
                )
        return wps[-1][1]

    def polygon_at(self, t: float) -> np.ndarray:
        return transform_polygon(self.shape, self.pose_at(t))


@dataclass
class World:
    static_map: OccupancyGrid
    obstacles: list[DynamicObstacle] = field(default_factory=list)
    bounds: tuple[float, float] = (0.0, 0.0)
    clock: float = 0.0

    def active_polygons(self) -> list[np.ndarray]:
        return [ob.polygon_at(self.clock) for ob in self.obstacles if ob.active(self.clock)]

    def occupied(self) -> np.ndarray:
        return self.static_map.occupied_mask()

    def truth_occupied_mask(self, t: float | None = None) -> np.ndarray:
        """Static occupied cells plus cells covered by obstacles active at t.

        Obstacle cells require actual area overlap (edge-touching cells are
        unobservable by any sensor and would only distort map comparisons).
        """
        t = self.clock if t is None else t
        mask = self.static_map.occupied_mask().copy()
        grid = self.static_map
        for ob in self.obstacles:
            if not ob.active(t):
                continue
            poly = ob.polygon_at(t)
            local = grid.to_grid_frame(poly)
            lo = np.floor(local.min(axis=0) / grid.resolution).astype(int) - 1
            hi = np.ceil(local.max(axis=0) / grid.resolution).astype(int) + 1
            for iy in range(max(lo[1], 0), min(hi[1], grid.height)):
                for ix in range(max(lo[0], 0), min(hi[0], grid.width)):
                    if convex_polygons_intersect(cell_square(grid, ix, iy), poly,
                                                 touch_tol=-1e-9):
                        mask[iy, ix] = True
        return mask


def advance_world(world: World, t: float) -> World:
    """World snapshot at simulation time t; t must not regress."""
    if t < world.clock - 1e-12:
        raise ContractViolationError(f"world clock regression: {t} < {world.clock}")
    return replace(world, clock=t)


def check_collision(world: World, pose: Pose2, footprint: list[tuple[float, float]]) -> bool:
    """True iff the footprint polygon at ``pose`` touches any occupied
    ground-truth cell or any active obstacle polygon (closed-set contact)."""
    poly = transform_polygon(np.asarray(footprint, dtype=np.float64), pose)

    for ob_poly in world.active_polygons():
        if convex_polygons_intersect(poly, ob_poly):
            return True

    grid = world.static_map
    occupied = world.occupied()
    local = grid.to_grid_frame(poly)
    lo = np.floor(local.min(axis=0) / grid.resolution).astype(int)
    hi = np.floor(local.max(axis=0) / grid.resolution).astype(int)
    for iy in range(max(lo[1], 0), min(hi[1] + 1, grid.height)):
        for ix in range(max(lo[0], 0), min(hi[0] + 1, grid.width)):
            if occupied[iy, ix] and convex_polygons_intersect(cell_square(grid, ix, iy), poly):
                return True
    return False


def load_world(path: str | Path) -> World:
    """Load a world YAML (map reference, bounds, obstacle list)."""
    from ..mapping.map_io import load_map

    path = Path(path)
    with open(path) as f:
        data = yaml.safe_load(f)
    known = {"map", "bounds", "obstacles"}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown world keys: {sorted(unknown)}")

    grid = load_map(path.parent / data["map"])
    bounds = tuple(float(v) for v in data["bounds"])
    obstacles = []
    for entry in data.get("obstacles", []):
        waypoints = tuple(
            (float(w["t"]), Pose2(float(w["x"]), float(w["y"]), float(w.get("yaw", 0.0))))
            for w in entry["waypoints"]
        )
        obstacles.append(
            DynamicObstacle(
                name=str(entry["name"]),
                shape=np.asarray(entry["shape"], dtype=np.float64),
                waypoints=waypoints,
                active_from=float(entry.get("active_from", 0.0)),
                active_until=float(entry.get("active_until", math.inf)),
            )
        )
    return World(static_map=grid, obstacles=obstacles, bounds=bounds)
