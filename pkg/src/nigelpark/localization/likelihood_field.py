"""Distance-to-nearest-occupied field used as the lidar measurement model."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..core.geometry import Pose2
from ..core.grid import OccupancyGrid


@dataclass(frozen=True)
class LikelihoodField:
    resolution: float
    origin: Pose2
    width: int
    height: int
    d_max: float
    distances: np.ndarray = field(repr=False)   # meters, (height, width)

    def distance_at(self, points: np.ndarray) -> np.ndarray:
        """Field lookup for world points (..., 2); off-lattice points read d_max."""
        pts = np.asarray(points, dtype=np.float64)
        # same corner-origin convention as OccupancyGrid
        import math
        c, s = math.cos(-self.origin.yaw), math.sin(-self.origin.yaw)
        dx = pts[..., 0] - self.origin.x
        dy = pts[..., 1] - self.origin.y
        ix = np.floor((c * dx - s * dy) / self.resolution).astype(np.int64)
        iy = np.floor((s * dx + c * dy) / self.resolution).astype(np.int64)
        inside = (ix >= 0) & (ix < self.width) & (iy >= 0) & (iy < self.height)
        out = np.full(pts.shape[:-1], self.d_max)
        out[inside] = self.distances[iy[inside], ix[inside]]
        return out


def build_likelihood_field(grid: OccupancyGrid, d_max: float = 0.5) -> LikelihoodField:
    """Exact Euclidean distance transform over cell centers, saturated at d_max."""
    occupied = grid.occupied_mask()
    if not occupied.any():
        raise ValueError("cannot build a likelihood field from a map with no occupied cells")
    cell_dist = ndimage.distance_transform_edt(~occupied)
    distances = np.minimum(cell_dist * grid.resolution, d_max)
    return LikelihoodField(
        resolution=grid.resolution,
        origin=grid.origin,
        width=grid.width,
        height=grid.height,
        d_max=d_max,
        distances=distances,
    )
