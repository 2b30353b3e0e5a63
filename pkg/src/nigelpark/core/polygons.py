"""Convex polygon helpers (closed-set semantics) shared by plant and planner."""

from __future__ import annotations

import math

import numpy as np

from .geometry import Pose2
from .grid import OccupancyGrid


def transform_polygon(vertices: np.ndarray, pose: Pose2) -> np.ndarray:
    """Map body-frame polygon vertices (k, 2) into the world frame."""
    v = np.asarray(vertices, dtype=np.float64)
    c, s = math.cos(pose.yaw), math.sin(pose.yaw)
    x = pose.x + c * v[:, 0] - s * v[:, 1]
    y = pose.y + s * v[:, 0] + c * v[:, 1]
    return np.stack([x, y], axis=-1)


def points_in_convex_polygon(points: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    """Closed-set membership test for points (..., 2) in a CCW convex polygon."""
    pts = np.asarray(points, dtype=np.float64)
    inside = np.ones(pts.shape[:-1], dtype=bool)
    k = len(polygon)
    for i in range(k):
        ax, ay = polygon[i]
        bx, by = polygon[(i + 1) % k]
        cross = (bx - ax) * (pts[..., 1] - ay) - (by - ay) * (pts[..., 0] - ax)
        inside &= cross >= -1e-12
    return inside


def _project(polygon: np.ndarray, axis: np.ndarray) -> tuple[float, float]:
    d = polygon @ axis
    return float(d.min()), float(d.max())


def convex_polygons_intersect(a: np.ndarray, b: np.ndarray, touch_tol: float = 1e-9) -> bool:
    """Separating-axis test; polygons are closed sets, so grazing contact
    within touch_tol counts as intersection."""
    for poly in (a, b):
        k = len(poly)
        for i in range(k):
            edge = poly[(i + 1) % k] - poly[i]
            n = math.hypot(edge[0], edge[1])
            if n < 1e-15:
                continue
            axis = np.array([-edge[1] / n, edge[0] / n])
            amin, amax = _project(a, axis)
            bmin, bmax = _project(b, axis)
            if bmin - amax > touch_tol or amin - bmax > touch_tol:
                return False
    return True


def cell_square(grid: OccupancyGrid, ix: int, iy: int) -> np.ndarray:
    """World-frame corner polygon of one grid cell."""
    r = grid.resolution
    local = np.array(
        [[ix * r, iy * r], [(ix + 1) * r, iy * r],
         [(ix + 1) * r, (iy + 1) * r], [ix * r, (iy + 1) * r]]
    )
    c, s = math.cos(grid.origin.yaw), math.sin(grid.origin.yaw)
    x = grid.origin.x + c * local[:, 0] - s * local[:, 1]
    y = grid.origin.y + s * local[:, 0] + c * local[:, 1]
    return np.stack([x, y], axis=-1)


def footprint_hits_grid(grid: OccupancyGrid, blocked: np.ndarray, pose: Pose2,
                        footprint: list[tuple[float, float]]) -> bool:
    """True iff the footprint at ``pose`` touches any blocked cell of ``grid``."""
    poly = transform_polygon(np.asarray(footprint, dtype=np.float64), pose)
    local = grid.to_grid_frame(poly)
    lo = np.floor(local.min(axis=0) / grid.resolution).astype(int)
    hi = np.floor(local.max(axis=0) / grid.resolution).astype(int)
    for iy in range(max(lo[1], 0), min(hi[1] + 1, grid.height)):
        for ix in range(max(lo[0], 0), min(hi[0] + 1, grid.width)):
            if blocked[iy, ix] and convex_polygons_intersect(cell_square(grid, ix, iy), poly):
                return True
    return False
