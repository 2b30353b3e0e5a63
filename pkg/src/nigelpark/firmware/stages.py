"""Model-level vs compiled-level execution of the control arithmetic.

The model stage runs the controllers on exact float measurements against the
continuous-time plant integrated at 1 ms.  The software stage runs the same
arithmetic with encoder-quantized inputs on a strict fixed 5 ms plant tick.
Their output traces must agree within 3e-2 rad (steering) and 3e-1 rad/s
(wheel rate).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..core.geometry import AckermannCommand, Pose2, VehicleParams
from ..simulator.vehicle import VehicleState, step_vehicle
from .controller import steering_controller_step, velocity_controller_step
from .types import FirmwareConfig, FirmwareState

STEERING_TOLERANCE = 3e-2     # rad
WHEEL_RATE_TOLERANCE = 3e-1   # rad/s

TRACE_COLUMNS = ("tick", "stamp", "target_v", "measured_v", "effort",
                 "target_delta", "delta_feedback")


@dataclass(frozen=True)
class SetpointProfile:
    """Piecewise-constant (time, command) schedule."""

    steps: tuple[tuple[float, AckermannCommand], ...]
    duration: float

    def at(self, t: float) -> AckermannCommand:
        current = self.steps[0][1]
        for t0, cmd in self.steps:
            if t0 <= t + 1e-12:
                current = cmd
            else:
                break
        return current


def golden_profile() -> SetpointProfile:
    """Step schedule exercising both loops in both directions."""
    return SetpointProfile(
        steps=(
            (0.0, AckermannCommand(0.0, 0.0)),
            (0.5, AckermannCommand(0.2, 8.0)),
            (2.5, AckermannCommand(-0.3, 12.0)),
            (4.5, AckermannCommand(0.1, -6.0)),
            (6.5, AckermannCommand(0.0, 0.0)),
        ),
        duration=8.0,
    )


def run_stage(stage: str, profile: SetpointProfile,
              cfg: FirmwareConfig = FirmwareConfig(),
              params: VehicleParams = VehicleParams()) -> list[dict]:
    """Execute one verification stage; returns trace rows (TRACE_COLUMNS)."""
    if stage == "mil":
        plant_dt = 1e-3
        quantized = False
    elif stage == "sil":
        plant_dt = 5e-3
        quantized = True
    else:
        raise ValueError(f"unknown stage {stage!r}")

    period = 1.0 / cfg.loop_rate
    substeps = int(round(period / plant_dt))
    if abs(substeps * plant_dt - period) > 1e-9:
        raise ValueError("plant step must divide the control period")

    ticks_per_rad = 2048 / (2.0 * math.pi)
    state = VehicleState(pose=Pose2())
    fw = FirmwareState()
    command = AckermannCommand(0.0, 0.0)
    wheel_angle = 0.0
    prev_ticks = 0

    rows: list[dict] = []
    n_cycles = int(round(profile.duration / period))
    for k in range(n_cycles):
        stamp = k * period
        setpoint = profile.at(stamp)

        if quantized:
            ticks = int(math.floor(wheel_angle * ticks_per_rad))
            measured_v = (ticks - prev_ticks) / ticks_per_rad / period if k > 0 else 0.0
            prev_ticks = ticks
            delta_feedback = round(state.delta / 1e-3) * 1e-3
        else:
            measured_v = state.wheel_omega
            delta_feedback = state.delta

        effort, fw = velocity_controller_step(setpoint.wheel_velocity, measured_v, cfg, fw)
        steer_cmd = steering_controller_step(setpoint.steering, cfg, fw)
        command = AckermannCommand(steer_cmd, effort * cfg.vel_cmd_limit)
        fw = FirmwareState(integ=fw.integ, prev_err=fw.prev_err, last_cmd=command,
                           last_effort=effort, tick=fw.tick + 1)

        rows.append({
            "tick": k,
            "stamp": stamp,
            "target_v": setpoint.wheel_velocity,
            "measured_v": measured_v,
            "effort": effort,
            "target_delta": setpoint.steering,
            "delta_feedback": delta_feedback,
        })

        for _ in range(substeps):
            wheel_angle += state.wheel_omega * plant_dt
            state = step_vehicle(state, command, params, plant_dt)
    return rows


def write_trace(rows: list[dict], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(TRACE_COLUMNS)
        for row in rows:
            writer.writerow([row["tick"], f"{row['stamp']:.6f}"]
                            + [repr(float(row[c])) for c in TRACE_COLUMNS[2:]])
    return path


def read_trace(path: str | Path) -> list[dict]:
    rows = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        for rec in reader:
            rows.append({
                "tick": int(rec["tick"]),
                "stamp": float(rec["stamp"]),
                **{c: float(rec[c]) for c in TRACE_COLUMNS[2:]},
            })
    return rows


def _columns(rows: list[dict]) -> dict[str, np.ndarray]:
    return {c: np.array([row[c] for row in rows], dtype=np.float64) for c in TRACE_COLUMNS}


def stage_equivalence(trace_a: list[dict], trace_b: list[dict],
                      settle_window: float = 0.5) -> dict:
    """Compare two stage traces on a common time grid.

    Deviations are reported for the full overlap and for samples outside the
    settle window after each setpoint change; the pass verdict uses the
    post-settle figures (the tolerances are steady-state bounds).
    """
    if not trace_a or not trace_b:
        raise ValueError("traces must be nonempty")
    a, b = _columns(trace_a), _columns(trace_b)
    t0 = max(a["stamp"][0], b["stamp"][0])
    t1 = min(a["stamp"][-1], b["stamp"][-1])
    if t1 <= t0:
        raise ValueError("traces have no overlapping time range")

    grid = a["stamp"][(a["stamp"] >= t0 - 1e-12) & (a["stamp"] <= t1 + 1e-12)]

    def resample(cols: dict[str, np.ndarray], key: str) -> np.ndarray:
        return np.interp(grid, cols["stamp"], cols[key])

    d_steer = np.abs(resample(a, "delta_feedback") - resample(b, "delta_feedback"))
    d_wheel = np.abs(resample(a, "measured_v") - resample(b, "measured_v"))

    # mask out the settle window after each target change (union over traces)
    settled = np.ones(len(grid), dtype=bool)
    for cols in (a, b):
        for key in ("target_v", "target_delta"):
            vals = resample(cols, key)
            change_ts = grid[np.flatnonzero(np.diff(vals) != 0.0) + 1]
            for tc in change_ts:
                settled &= ~((grid >= tc) & (grid < tc + settle_window))

    def stats(d: np.ndarray, mask: np.ndarray) -> tuple[float, float]:
        sel = d[mask] if mask.any() else d
        return float(sel.max()), float(sel.mean())

    max_steer, mean_steer = stats(d_steer, settled)
    max_wheel, mean_wheel = stats(d_wheel, settled)
    max_steer_full, mean_steer_full = float(d_steer.max()), float(d_steer.mean())
    max_wheel_full, mean_wheel_full = float(d_wheel.max()), float(d_wheel.mean())

    steering_pass = max_steer <= STEERING_TOLERANCE
    wheel_pass = max_wheel <= WHEEL_RATE_TOLERANCE
    return {
        "tolerances": {"steering": STEERING_TOLERANCE, "wheel_rate": WHEEL_RATE_TOLERANCE},
        "settle_window": settle_window,
        "steering": {"max": max_steer, "mean": mean_steer,
                     "max_full": max_steer_full, "mean_full": mean_steer_full,
                     "pass": steering_pass},
        "wheel_rate": {"max": max_wheel, "mean": mean_wheel,
                       "max_full": max_wheel_full, "mean_full": mean_wheel_full,
                       "pass": wheel_pass},
        "pass": bool(steering_pass and wheel_pass),
    }


def write_equivalence_report(report: dict, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    return path
