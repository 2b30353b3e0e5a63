from .costmap import Costmap, InflationParams, inflate
from .astar import (
    PlanningError,
    InvalidStartError,
    InvalidGoalError,
    UnreachableError,
    plan_global,
    path_cost,
)
from .teb import (
    ElasticBand,
    TebWeights,
    TebConfig,
    TebDiagnostics,
    BandViolation,
    DegenerateBandError,
    teb_optimize,
    check_feasibility,
    extract_command,
    init_band,
    signed_velocities,
)

__all__ = [
    "Costmap",
    "InflationParams",
    "inflate",
    "PlanningError",
    "InvalidStartError",
    "InvalidGoalError",
    "UnreachableError",
    "plan_global",
    "path_cost",
    "ElasticBand",
    "TebWeights",
    "TebConfig",
    "TebDiagnostics",
    "BandViolation",
    "DegenerateBandError",
    "teb_optimize",
    "check_feasibility",
    "extract_command",
    "init_band",
    "signed_velocities",
]
