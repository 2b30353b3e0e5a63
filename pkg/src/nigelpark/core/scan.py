"""Single 360-degree lidar sweep."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Pose2


@dataclass(frozen=True)
class LaserScan:
    """One full range sweep; out-of-range beams are encoded as range_max."""

    angle_min: float
    angle_increment: float
    n_beams: int
    ranges: np.ndarray = field(repr=False)
    range_min: float
    range_max: float
    stamp: float = 0.0

    def __post_init__(self) -> None:
        if self.n_beams <= 0:
            raise ValueError("n_beams must be positive")
        if abs(self.n_beams * self.angle_increment - 2.0 * math.pi) > 1e-6:
            raise ValueError("scan must cover a full 2*pi sweep")
        if self.angle_increment > math.pi / 180.0 + 1e-12:
            raise ValueError("angle_increment must be at most 1 degree")
        r = np.asarray(self.ranges, dtype=np.float64)
        if r.shape != (self.n_beams,):
            raise ValueError("ranges must have shape (n_beams,)")
        if not np.all(np.isfinite(r)):
            raise ValueError("ranges must be finite (no NaN/inf)")
        if np.any(r < self.range_min - 1e-9) or np.any(r > self.range_max + 1e-9):
            raise ValueError("ranges must lie within [range_min, range_max]")
        object.__setattr__(self, "ranges", r)

    def angles(self) -> np.ndarray:
        return self.angle_min + self.angle_increment * np.arange(self.n_beams)

    def hit_mask(self) -> np.ndarray:
        """True for beams that report an actual return (below range_max)."""
        return self.ranges < self.range_max * (1.0 - 1e-12)

    def endpoints(self, pose: Pose2) -> np.ndarray:
        """World-frame beam endpoints (n_beams, 2) for a sensor at ``pose``."""
        a = self.angles() + pose.yaw
        return np.stack(
            [pose.x + self.ranges * np.cos(a), pose.y + self.ranges * np.sin(a)], axis=-1
        )
