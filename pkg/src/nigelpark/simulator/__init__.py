from .vehicle import VehicleState, step_vehicle
from .world import (
    DynamicObstacle,
    World,
    ContractViolationError,
    advance_world,
    check_collision,
    load_world,
    transform_polygon,
    convex_polygons_intersect,
    points_in_convex_polygon,
)
from .sensors import SensorSpec, SensorFrame, SensorRig, simulate_lidar, sample_sensors

__all__ = [
    "VehicleState",
    "step_vehicle",
    "DynamicObstacle",
    "World",
    "ContractViolationError",
    "advance_world",
    "check_collision",
    "load_world",
    "transform_polygon",
    "convex_polygons_intersect",
    "points_in_convex_polygon",
    "SensorSpec",
    "SensorFrame",
    "SensorRig",
    "simulate_lidar",
    "sample_sensors",
]
