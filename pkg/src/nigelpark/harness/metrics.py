"""Trial outcomes and the cross-trial repeatability metric."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class TrialResult:
    seed: int
    scenario_name: str
    goal_reached: bool
    cause: str                                # success|timeout|collision|divergence|unreachable
    final_pose_error: tuple[float, float, float]
    collision_count: int
    time_to_goal: float
    replan_count: int
    trajectory_true: np.ndarray = field(repr=False)        # rows: stamp, x, y, yaw
    trajectory_estimated: np.ndarray = field(repr=False)


@dataclass
class RepeatabilityReport:
    deviations: list[float]
    mean: float
    std: float
    max: float
    tolerance: float
    passed: bool


def resample_by_arclength(xy: np.ndarray, n_samples: int = 200) -> np.ndarray:
    """Resample a polyline at n_samples equally spaced arc-length fractions."""
    xy = np.asarray(xy, dtype=np.float64)
    if len(xy) == 0:
        raise ValueError("empty trajectory")
    if len(xy) == 1:
        return np.tile(xy[0], (n_samples, 1))
    seg = np.linalg.norm(np.diff(xy, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    if total < 1e-12:
        return np.tile(xy[0], (n_samples, 1))
    u = s / total
    targets = np.linspace(0.0, 1.0, n_samples)
    return np.stack([np.interp(targets, u, xy[:, 0]), np.interp(targets, u, xy[:, 1])], axis=-1)


def compute_repeatability(trials: list[TrialResult], tolerance: float = 2.5e-2,
                          n_samples: int = 200) -> RepeatabilityReport:
    """Per-trial max distance to the arc-length-resampled mean trajectory.

    All trials must come from the same scenario; ground-truth trajectories
    are compared (estimation error is reported separately per trial).
    """
    if len(trials) < 2:
        raise ValueError("repeatability needs at least two trials")
    names = {t.scenario_name for t in trials}
    if len(names) != 1:
        raise ValueError(f"trials mix scenarios: {sorted(names)}")

    resampled = np.stack(
        [resample_by_arclength(t.trajectory_true[:, 1:3], n_samples) for t in trials])
    mean_traj = resampled.mean(axis=0)
    deviations = [float(np.linalg.norm(r - mean_traj, axis=1).max()) for r in resampled]
    arr = np.asarray(deviations)
    return RepeatabilityReport(
        deviations=deviations,
        mean=float(arr.mean()),
        std=float(arr.std()),
        max=float(arr.max()),
        tolerance=tolerance,
        passed=bool(arr.max() <= tolerance),
    )
