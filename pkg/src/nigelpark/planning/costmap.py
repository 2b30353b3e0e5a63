"""Lethal/inflated cost layers on top of an occupancy grid."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..core.grid import OccupancyGrid


@dataclass(frozen=True)
class InflationParams:
    inscribed_radius: float = 0.08
    inflation_radius: float = 0.30
    cost_factor: float = 10.0           # exp decay rate, 1/m
    unknown_is_lethal: bool = True


@dataclass
class Costmap:
    base: OccupancyGrid
    lethal: np.ndarray = field(repr=False)     # bool (h, w)
    cost: np.ndarray = field(repr=False)       # float in [0, 1]; 1 on lethal cells
    params: InflationParams = field(default_factory=InflationParams)

    @property
    def resolution(self) -> float:
        return self.base.resolution

    def lethal_points_near(self, center: tuple[float, float], half_extent: float) -> np.ndarray:
        """World centers of lethal cells inside a square window (for the
        local planner's obstacle set)."""
        iys, ixs = np.nonzero(self.lethal)
        if len(ixs) == 0:
            return np.empty((0, 2))
        pts = self.base.cell_centers(np.stack([ixs, iys], axis=-1))
        keep = (np.abs(pts[:, 0] - center[0]) <= half_extent) & (
            np.abs(pts[:, 1] - center[1]) <= half_extent)
        return pts[keep]


def inflate(grid: OccupancyGrid, params: InflationParams = InflationParams()) -> Costmap:
    """Mark occupied (and optionally unknown) cells lethal, grow them by the
    inscribed radius, and decay cost exponentially out to the inflation radius."""
    source = grid.occupied_mask().copy()
    if params.unknown_is_lethal:
        source |= ~grid.observed

    if source.any():
        cell_dist = ndimage.distance_transform_edt(~source) * grid.resolution
    else:
        cell_dist = np.full((grid.height, grid.width), np.inf)

    lethal = cell_dist <= params.inscribed_radius + 1e-12
    cost = np.zeros_like(cell_dist)
    ring = (~lethal) & (cell_dist <= params.inflation_radius + 1e-12)
    cost[ring] = np.exp(-params.cost_factor * (cell_dist[ring] - params.inscribed_radius))
    cost[lethal] = 1.0
    return Costmap(base=grid, lethal=lethal, cost=cost, params=params)
