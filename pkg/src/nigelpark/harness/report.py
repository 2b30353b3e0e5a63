"""Versioned verification report: assembly, schema validation, emission."""

from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path

import jsonschema

from .metrics import RepeatabilityReport, TrialResult
from .scenario import Scenario

SCHEMA_VERSION = "1.0"


def load_report_schema() -> dict:
    ref = resources.files("nigelpark.schemas") / "report.schema.json"
    return json.loads(ref.read_text())


def build_report(scenario: Scenario, trials: list[TrialResult],
                 repeatability: RepeatabilityReport,
                 firmware_equivalence: dict) -> dict:
    trial_rows = []
    for t in trials:
        trial_rows.append({
            "seed": t.seed,
            "goal_reached": t.goal_reached,
            "cause": t.cause,
            "final_pose_error": {
                "dx": t.final_pose_error[0],
                "dy": t.final_pose_error[1],
                "dyaw": t.final_pose_error[2],
            },
            "collision_count": t.collision_count,
            "time_to_goal": None if math.isinf(t.time_to_goal) else t.time_to_goal,
            "replan_count": t.replan_count,
        })
    overall = (
        repeatability.passed
        and all(t.goal_reached for t in trials)
        and all(t.collision_count == 0 for t in trials)
        and bool(firmware_equivalence["pass"])
    )
    return {
        "schema_version": SCHEMA_VERSION,
        "scenario": scenario.name,
        "stage": scenario.stage,
        "tolerances": {
            "xy": scenario.tolerances.xy,
            "yaw": scenario.tolerances.yaw,
            "trajectory": scenario.tolerances.trajectory,
        },
        "trials": trial_rows,
        "repeatability": {
            "deviations": repeatability.deviations,
            "mean": repeatability.mean,
            "std": repeatability.std,
            "max": repeatability.max,
            "tolerance": repeatability.tolerance,
            "pass": repeatability.passed,
        },
        "firmware_equivalence": firmware_equivalence,
        "overall_pass": overall,
    }


def validate_report(report: dict) -> None:
    jsonschema.validate(report, load_report_schema())


def write_report(report: dict, path: str | Path) -> Path:
    validate_report(report)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    return path
