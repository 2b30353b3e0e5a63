"""Scenario files: what to run, where, with which seeds and tolerances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..core.geometry import Pose2

_KNOWN_KEYS = {
    "name", "world", "mode", "stage", "start", "parking_goal", "prior_map",
    "tour", "seeds", "trials", "rates", "tolerances", "timeout",
    "obstacle_overrides",
}


@dataclass(frozen=True)
class Rates:
    control_hz: float = 20.0
    plan_hz: float = 10.0
    scan_hz: float = 10.0

    def __post_init__(self) -> None:
        if not (self.scan_hz <= self.control_hz and self.plan_hz <= self.control_hz):
            raise ValueError("scan and plan rates must not exceed the control rate")


@dataclass(frozen=True)
class Tolerances:
    xy: float = 5e-2
    yaw: float = 8.73e-2
    trajectory: float = 2.5e-2


@dataclass(frozen=True)
class Scenario:
    name: str
    world_file: Path
    mode: str                       # "mapping" | "parking"
    start: Pose2
    parking_goal: Pose2 | None = None
    prior_map: Path | None = None
    tour: tuple[Pose2, ...] = ()
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    trials: int = 5
    stage: str = "virtual"          # "virtual" | "replay"
    rates: Rates = field(default_factory=Rates)
    tolerances: Tolerances = field(default_factory=Tolerances)
    timeout: float = 60.0
    obstacle_overrides: tuple[dict, ...] = ()

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.mode not in ("mapping", "parking"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.stage not in ("virtual", "replay"):
            raise ValueError(f"unknown stage {self.stage!r}")
        if self.mode == "parking":
            if self.parking_goal is None:
                raise ValueError("parking mode needs a parking_goal")
            if self.prior_map is None:
                raise ValueError("parking mode needs a prior_map")
        if self.mode == "mapping" and not self.tour:
            raise ValueError("mapping mode needs a waypoint tour")

    def trial_seeds(self) -> tuple[int, ...]:
        if len(self.seeds) >= self.trials:
            return self.seeds[: self.trials]
        start = (self.seeds[-1] if self.seeds else 0) + 1
        extra = tuple(range(start, start + self.trials - len(self.seeds)))
        return self.seeds + extra


def _pose(raw: dict) -> Pose2:
    return Pose2(float(raw["x"]), float(raw["y"]), float(raw.get("yaw", 0.0)))


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"scenario file not found: {path}")
    with open(path) as f:
        data = yaml.safe_load(f)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: scenario must be a mapping")
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        raise ValueError(f"{path}: unknown scenario keys: {sorted(unknown)}")

    base = path.parent
    rates = Rates(**{f"{k}": float(v) for k, v in data.get("rates", {}).items()})
    tol_raw = data.get("tolerances", {})
    tolerances = Tolerances(
        xy=float(tol_raw.get("xy", 5e-2)),
        yaw=float(tol_raw.get("yaw", 8.73e-2)),
        trajectory=float(tol_raw.get("trajectory", 2.5e-2)),
    )
    return Scenario(
        name=str(data.get("name", path.stem)),
        world_file=(base / data["world"]).resolve(),
        mode=str(data["mode"]),
        start=_pose(data["start"]),
        parking_goal=_pose(data["parking_goal"]) if "parking_goal" in data else None,
        prior_map=(base / data["prior_map"]).resolve() if "prior_map" in data else None,
        tour=tuple(_pose(p) for p in data.get("tour", [])),
        seeds=tuple(int(s) for s in data.get("seeds", (1, 2, 3, 4, 5))),
        trials=int(data.get("trials", 5)),
        stage=str(data.get("stage", "virtual")),
        rates=rates,
        tolerances=tolerances,
        timeout=float(data.get("timeout", 60.0)),
        obstacle_overrides=tuple(data.get("obstacle_overrides", [])),
    )


def load_perturbation(path: str | Path) -> dict:
    """Perturbation spec for the replay stage: obstacle shifts and additions."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"perturbation file not found: {path}")
    with open(path) as f:
        data = yaml.safe_load(f) or {}
    unknown = set(data) - {"shifts", "additions"}
    if unknown:
        raise ValueError(f"{path}: unknown perturbation keys: {sorted(unknown)}")
    return {"shifts": data.get("shifts", []), "additions": data.get("additions", [])}
