"""Log-odds occupancy lattice and exact cell-level primitives.

Conventions fixed here and relied on everywhere else:

* the grid origin pose is the *outer corner* of cell (0, 0), matching the
  PGM+YAML map convention;
* cell indices are (ix, iy) with ix along the origin frame's x axis; the
  backing arrays are indexed ``[iy, ix]``;
* log-odds are clamped to [L_MIN, L_MAX] and an explicit observed bit
  distinguishes "never seen" from "seen, p = 0.5".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Pose2

L_MIN = -4.6
L_MAX = 4.6

#: Sentinel returned by world_to_grid for points off the lattice.
OUTSIDE = None


@dataclass
class OccupancyGrid:
    resolution: float
    origin: Pose2
    width: int
    height: int
    log_odds: np.ndarray = field(repr=False)
    observed: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if self.log_odds.shape != (self.height, self.width):
            raise ValueError("log_odds shape must be (height, width)")
        if self.observed.shape != (self.height, self.width):
            raise ValueError("observed shape must be (height, width)")

    @classmethod
    def empty(cls, width: int, height: int, resolution: float,
              origin: Pose2 = Pose2()) -> "OccupancyGrid":
        return cls(
            resolution=resolution,
            origin=origin,
            width=width,
            height=height,
            log_odds=np.zeros((height, width), dtype=np.float64),
            observed=np.zeros((height, width), dtype=bool),
        )

    def copy(self) -> "OccupancyGrid":
        return OccupancyGrid(self.resolution, self.origin, self.width, self.height,
                             self.log_odds.copy(), self.observed.copy())

    def probability(self) -> np.ndarray:
        """Occupancy probability per cell, 1 / (1 + exp(-log_odds))."""
        return 1.0 / (1.0 + np.exp(-self.log_odds))

    def occupied_mask(self, p_occupied: float = 0.65) -> np.ndarray:
        return self.observed & (self.probability() >= p_occupied)

    def free_mask(self, p_free: float = 0.196) -> np.ndarray:
        return self.observed & (self.probability() <= p_free)

    def contains(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def clamp_log_odds(self) -> None:
        np.clip(self.log_odds, L_MIN, L_MAX, out=self.log_odds)

    # -- world/grid coordinate changes ------------------------------------

    def to_grid_frame(self, points: np.ndarray) -> np.ndarray:
        """Rotate/translate world points (n, 2) into the origin-corner frame."""
        pts = np.asarray(points, dtype=np.float64)
        c, s = math.cos(-self.origin.yaw), math.sin(-self.origin.yaw)
        dx = pts[..., 0] - self.origin.x
        dy = pts[..., 1] - self.origin.y
        return np.stack([c * dx - s * dy, s * dx + c * dy], axis=-1)

    def cells_of(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized world->cell: returns int cells (n, 2) as (ix, iy) and an inside mask."""
        local = self.to_grid_frame(points)
        cells = np.floor(local / self.resolution).astype(np.int64)
        inside = (
            (cells[..., 0] >= 0) & (cells[..., 0] < self.width)
            & (cells[..., 1] >= 0) & (cells[..., 1] < self.height)
        )
        return cells, inside

    def cell_centers(self, cells: np.ndarray) -> np.ndarray:
        """World coordinates of cell centers for int cells (n, 2)."""
        cells = np.asarray(cells, dtype=np.float64)
        local = (cells + 0.5) * self.resolution
        c, s = math.cos(self.origin.yaw), math.sin(self.origin.yaw)
        x = self.origin.x + c * local[..., 0] - s * local[..., 1]
        y = self.origin.y + s * local[..., 0] + c * local[..., 1]
        return np.stack([x, y], axis=-1)


def world_to_grid(grid: OccupancyGrid, point: tuple[float, float]):
    """Cell index (ix, iy) containing a world point, or OUTSIDE off the lattice."""
    cells, inside = grid.cells_of(np.asarray(point, dtype=np.float64))
    if not bool(inside):
        return OUTSIDE
    return (int(cells[0]), int(cells[1]))


def grid_to_world(grid: OccupancyGrid, cell: tuple[int, int]) -> tuple[float, float]:
    """World coordinates of a cell's center."""
    p = grid.cell_centers(np.asarray(cell, dtype=np.float64))
    return (float(p[0]), float(p[1]))


def _bresenham(c0: tuple[int, int], c1: tuple[int, int]) -> list[tuple[int, int]]:
    x0, y0 = c0
    x1, y1 = c1
    dx, dy = abs(x1 - x0), abs(y1 - y0)
    sx = 1 if x1 >= x0 else -1
    sy = 1 if y1 >= y0 else -1
    err = dx - dy
    out = []
    x, y = x0, y0
    while True:
        out.append((x, y))
        if x == x1 and y == y1:
            break
        e2 = 2 * err
        if e2 >= -dy:
            err -= dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy
    return out


def raytrace_cells(grid: OccupancyGrid, start: tuple[float, float],
                   end: tuple[float, float], include_end: bool = True) -> list[tuple[int, int]]:
    """Bresenham cell run between two world points, clipped to the lattice.

    The start cell comes first.  With include_end=False the end cell is
    dropped (callers updating a hit cell separately use this).  The traced
    cell set is direction-symmetric: the line is rasterized in a canonical
    endpoint order and reversed as needed, so swapping start/end exactly
    reverses the output.
    """
    if not all(math.isfinite(v) for v in (*start, *end)):
        raise ValueError("raytrace endpoints must be finite")
    cells, _ = grid.cells_of(np.array([start, end], dtype=np.float64))
    c0 = (int(cells[0, 0]), int(cells[0, 1]))
    c1 = (int(cells[1, 0]), int(cells[1, 1]))
    if c1 < c0:
        run = _bresenham(c1, c0)[::-1]
    else:
        run = _bresenham(c0, c1)
    if not include_end and run and run[-1] == c1:
        run = run[:-1]
    return [c for c in run if grid.contains(*c)]
