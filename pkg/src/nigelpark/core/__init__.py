from .geometry import (
    Pose2,
    Twist2,
    AckermannCommand,
    VehicleParams,
    normalize_angle,
    compose,
    inverse,
    between,
)
from .grid import OccupancyGrid, world_to_grid, grid_to_world, raytrace_cells, L_MIN, L_MAX, OUTSIDE
from .scan import LaserScan

__all__ = [
    "Pose2",
    "Twist2",
    "AckermannCommand",
    "VehicleParams",
    "normalize_angle",
    "compose",
    "inverse",
    "between",
    "OccupancyGrid",
    "world_to_grid",
    "grid_to_world",
    "raytrace_cells",
    "L_MIN",
    "L_MAX",
    "OUTSIDE",
    "LaserScan",
]
