from .scenario import Scenario, Rates, Tolerances, load_scenario, load_perturbation
from .metrics import TrialResult, RepeatabilityReport, compute_repeatability, resample_by_arclength
from .navigation import navigate, run_mapping, run_replay_stage, LoopConfig, MappingResult, SIM_DT
from .report import build_report, validate_report, write_report, load_report_schema

__all__ = [
    "Scenario",
    "Rates",
    "Tolerances",
    "load_scenario",
    "load_perturbation",
    "TrialResult",
    "RepeatabilityReport",
    "compute_repeatability",
    "resample_by_arclength",
    "navigate",
    "run_mapping",
    "run_replay_stage",
    "LoopConfig",
    "MappingResult",
    "SIM_DT",
    "build_report",
    "validate_report",
    "write_report",
    "load_report_schema",
]
