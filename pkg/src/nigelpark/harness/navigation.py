"""Lockstep navigation loop wiring perception, planning and control.

One trial is a single deterministic loop: the plant ticks at 5 ms; scans feed
odometry plus localization (or SLAM in mapping mode) at the scan rate; the
local planner runs at the plan rate; command extraction and the firmware run
at the control rate.  Ground truth is only used for the success/collision
verdict and the logged true trajectory, never for control.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..core.geometry import AckermannCommand, Pose2, VehicleParams, normalize_angle
from ..core.grid import OccupancyGrid
from ..core.polygons import cell_square, convex_polygons_intersect
from ..firmware.controller import run_firmware_cycle
from ..firmware.types import FirmwareConfig, FirmwareState
from ..localization.likelihood_field import build_likelihood_field
from ..localization.mcl import (
    KldParams,
    MeasurementModel,
    estimate,
    init_particles,
    measurement_update,
    motion_update,
    resample_adaptive,
)
from ..mapping.map_io import load_map, save_map
from ..mapping.slam import SlamState, slam_step
from ..odometry import OdometryParams, align_scans, dead_reckon
from ..planning.astar import InvalidGoalError, InvalidStartError, UnreachableError, plan_global
from ..planning.costmap import Costmap, InflationParams, inflate
from ..planning.teb import (
    ElasticBand,
    TebConfig,
    TebWeights,
    check_feasibility,
    extract_command,
    init_band,
    teb_optimize,
)
from ..simulator.sensors import SensorRig, SensorSpec
from ..simulator.vehicle import VehicleState, step_vehicle
from ..simulator.world import DynamicObstacle, World, advance_world, check_collision, load_world
from .metrics import TrialResult
from .scenario import Scenario

SIM_DT = 0.005


@dataclass(frozen=True)
class LoopConfig:
    """Harness-level knobs that are not part of any module contract."""

    init_sigma: tuple[float, float, float] = (0.03, 0.03, 0.02)
    n_particles: int = 600
    stop_fraction: float = 0.55        # stack stops at this fraction of the goal tolerance
    creep_speed: float = 0.06
    goal_gain: float = 1.0
    replan_cost_ratio: float = 1.2
    replan_cost_slack: float = 1.0     # absolute cost headroom; ratios on tiny bands are noise
    max_plan_failures: int = 8
    waypoint_tolerance: float = 0.12
    field_d_max: float = 0.5


@dataclass
class MappingResult:
    seed: int
    scenario_name: str
    success: bool
    cause: str
    slam: SlamState
    trajectory_true: np.ndarray
    pose_log: np.ndarray
    map_paths: tuple[Path, Path] | None = None


class _Recorder:
    """Collects per-stage log rows and writes the CSV files documented in
    the README; stamps carry six decimals, other floats full precision."""

    def __init__(self) -> None:
        self.state_rows: list[tuple] = []
        self.pose_rows: list[tuple] = []
        self.odom_rows: list[tuple] = []
        self.plan_rows: list[tuple] = []
        self.firmware_rows: list[tuple] = []
        self.plan_diagnostics: list[dict] = []

    def write(self, out_dir: Path) -> None:
        out_dir.mkdir(parents=True, exist_ok=True)
        self._csv(out_dir / "state_log.csv",
                  ("stamp", "x", "y", "yaw", "v", "delta", "wheel_omega"), self.state_rows)
        self._csv(out_dir / "pose_log.csv",
                  ("stamp", "x", "y", "yaw", "cov_xx", "cov_yy", "cov_tt",
                   "n_particles", "converged"), self.pose_rows)
        self._csv(out_dir / "odom_log.csv",
                  ("stamp", "dx", "dy", "dyaw", "method", "cov_xx", "cov_yy", "cov_tt"),
                  self.odom_rows)
        self._csv(out_dir / "plan_log.csv",
                  ("cycle", "stamp", "index", "x", "y", "yaw", "dt"), self.plan_rows)
        self._csv(out_dir / "firmware_trace.csv",
                  ("tick", "stamp", "target_v", "measured_v", "effort",
                   "target_delta", "delta_feedback"), self.firmware_rows)
        with open(out_dir / "plan_diagnostics.json", "w") as f:
            json.dump(self.plan_diagnostics, f, indent=2, sort_keys=True)
            f.write("\n")

    @staticmethod
    def _csv(path: Path, header: tuple[str, ...], rows: list[tuple]) -> None:
        with open(path, "w") as f:
            f.write(",".join(header) + "\n")
            for row in rows:
                out = []
                for name, value in zip(header, row):
                    if name == "stamp":
                        out.append(f"{value:.6f}")
                    elif isinstance(value, bool):
                        out.append("1" if value else "0")
                    elif isinstance(value, float):
                        out.append(repr(value))
                    else:
                        out.append(str(value))
                f.write(",".join(out) + "\n")


def _apply_obstacle_entries(world: World, entries: tuple[dict, ...] | list[dict]) -> World:
    obstacles = list(world.obstacles)
    for entry in entries:
        waypoints = tuple(
            (float(w["t"]), Pose2(float(w["x"]), float(w["y"]), float(w.get("yaw", 0.0))))
            for w in entry["waypoints"]
        )
        obstacles.append(DynamicObstacle(
            name=str(entry["name"]),
            shape=np.asarray(entry["shape"], dtype=np.float64),
            waypoints=waypoints,
            active_from=float(entry.get("active_from", 0.0)),
            active_until=float(entry.get("active_until", math.inf)),
        ))
    return replace(world, obstacles=obstacles)


def _apply_perturbation(world: World, perturbation: dict | None) -> World:
    if not perturbation:
        return world
    obstacles = []
    shifts = {s["name"]: (float(s.get("dx", 0.0)), float(s.get("dy", 0.0)))
              for s in perturbation.get("shifts", [])}
    for ob in world.obstacles:
        if ob.name in shifts:
            dx, dy = shifts[ob.name]
            moved = tuple((t, Pose2(p.x + dx, p.y + dy, p.yaw)) for t, p in ob.waypoints)
            obstacles.append(replace(ob, waypoints=moved))
        else:
            obstacles.append(ob)
    world = replace(world, obstacles=obstacles)
    return _apply_obstacle_entries(world, perturbation.get("additions", []))


def _rasterize_obstacles(grid: OccupancyGrid, world: World) -> OccupancyGrid:
    """Stamp currently active obstacle polygons into a copy of the prior map
    so the global planner and the feasibility gate can see them."""
    out = grid.copy()
    from ..core.grid import L_MAX

    for poly in world.active_polygons():
        local = out.to_grid_frame(poly)
        lo = np.floor(local.min(axis=0) / out.resolution).astype(int) - 1
        hi = np.ceil(local.max(axis=0) / out.resolution).astype(int) + 1
        for iy in range(max(lo[1], 0), min(hi[1], out.height)):
            for ix in range(max(lo[0], 0), min(hi[0], out.width)):
                if convex_polygons_intersect(cell_square(out, ix, iy), poly):
                    out.log_odds[iy, ix] = L_MAX
                    out.observed[iy, ix] = True
    return out


@dataclass
class _Planner:
    """Replan bookkeeping around the global planner and the band optimizer."""

    params: VehicleParams
    weights: TebWeights = field(default_factory=TebWeights)
    config: TebConfig = field(default_factory=TebConfig)
    inflation: InflationParams = field(default_factory=InflationParams)
    loop: LoopConfig = field(default_factory=LoopConfig)
    band: ElasticBand | None = None
    last_cost: float = math.inf
    replan_count: int = 0
    plan_failures: int = 0
    initial_plan_done: bool = False
    replan_reasons: list[str] = field(default_factory=list)

    def costmap(self, prior: OccupancyGrid, world: World) -> Costmap:
        return inflate(_rasterize_obstacles(prior, world), self.inflation)

    def _obstacle_points(self, cm: Costmap, world: World, est: Pose2) -> np.ndarray:
        pts = [cm.lethal_points_near((est.x, est.y), self.config.obstacle_window)]
        pts.extend(world.active_polygons())
        pts = [p for p in pts if len(p)]
        return np.concatenate(pts) if pts else np.empty((0, 2))

    def _advance(self, est: Pose2) -> ElasticBand | None:
        band = self.band
        if band is None:
            return None
        pos = np.array([est.x, est.y])
        window = band.poses[: min(6, len(band.poses) - 1), :2]
        j = int(np.argmin(np.linalg.norm(window - pos, axis=1)))
        poses = list(band.poses[j:].copy())
        dts = list(band.dts[j:].copy())
        if len(poses) < 2:
            return None
        poses[0] = np.array([est.x, est.y, est.yaw])
        # merge leading poses sitting almost on top of the new start; a tiny
        # first segment turns estimate jitter into a curvature spike
        while len(poses) > 2 and np.linalg.norm(poses[1][:2] - poses[0][:2]) < 0.05:
            dts[1] += dts[0]
            del poses[1]
            del dts[0]
        return ElasticBand(np.asarray(poses), np.asarray(dts))

    def plan_cycle(self, prior: OccupancyGrid, world: World, est: Pose2, goal: Pose2
                   ) -> tuple[ElasticBand | None, str | None, dict | None]:
        """Advance/optimize the band, replanning when triggered.

        Returns (band, fatal_cause, diagnostics): band None with fatal cause
        after repeated planning failures, band None without cause while a
        transient failure is being retried.
        """
        cm = self.costmap(prior, world)
        obstacles = self._obstacle_points(cm, world, est)

        need_replan = False
        reason = ""
        band = self._advance(est)
        if band is None:
            need_replan = True
            reason = "band_exhausted"

        diag_out: dict | None = None
        if not need_replan:
            band, diag = teb_optimize(band, cm, self.params, self.weights, obstacles,
                                      replace(self.config, outer_iters=2))
            cost = diag.cost_history[-1] if diag.cost_history else 0.0
            diag_out = self._diag_dict(diag)
            if cost > self.loop.replan_cost_ratio * self.last_cost + self.loop.replan_cost_slack:
                need_replan = True
                reason = f"cost_spike:{cost:.3g}>{self.last_cost:.3g}"
            else:
                self.last_cost = cost
                feasible, viol = check_feasibility(band, cm, self.params.footprint(),
                                                   self.params.kappa_max)
                if not feasible:
                    need_replan = True
                    reason = f"infeasible:{viol.kind}@{viol.pose_index}"

        if need_replan:
            try:
                path = plan_global(cm, est, goal)
            except (UnreachableError, InvalidGoalError, InvalidStartError):
                self.plan_failures += 1
                self.band = None
                if self.plan_failures > self.loop.max_plan_failures:
                    return None, "unreachable", None
                return None, None, None
            self.plan_failures = 0
            if self.initial_plan_done:
                self.replan_count += 1
                self.replan_reasons.append(reason)
            band = init_band(path, est, goal, self.params, self.config)
            band, diag = teb_optimize(band, cm, self.params, self.weights, obstacles,
                                      self.config)
            self.last_cost = diag.cost_history[-1] if diag.cost_history else math.inf
            diag_out = self._diag_dict(diag)

        self.initial_plan_done = True
        self.band = band
        return band, None, diag_out

    @staticmethod
    def _diag_dict(diag) -> dict:
        return {
            "term_costs": {k: float(v) for k, v in diag.term_costs.items()},
            "iterations": diag.accepted_steps + diag.rejected_steps,
            "accepted": diag.accepted_steps,
            "feasibility": diag.feasibility_flags,
            "final_cost": diag.cost_history[-1] if diag.cost_history else None,
        }


def _goal_error(pose: Pose2, goal: Pose2) -> tuple[float, float, float]:
    return (abs(pose.x - goal.x), abs(pose.y - goal.y),
            abs(normalize_angle(pose.yaw - goal.yaw)))


def within_tolerance(err: tuple[float, float, float], tol_xy: float, tol_yaw: float) -> bool:
    return err[0] <= tol_xy and err[1] <= tol_xy and err[2] <= tol_yaw


def _prepare_world(scenario: Scenario, perturbation: dict | None) -> World:
    world = load_world(scenario.world_file)
    world = _apply_obstacle_entries(world, scenario.obstacle_overrides)
    return _apply_perturbation(world, perturbation)


def navigate(scenario: Scenario, seed: int, out_dir: str | Path | None = None,
             perturbation: dict | None = None,
             prior_map: str | Path | None = None,
             params: VehicleParams = VehicleParams(),
             loop_config: LoopConfig = LoopConfig()) -> TrialResult:
    """Run one seeded source-to-goal parking trial; fully deterministic."""
    if scenario.mode != "parking":
        raise ValueError("navigate() runs parking scenarios; use run_mapping for tours")
    goal = scenario.parking_goal
    assert goal is not None

    world = _prepare_world(scenario, perturbation)
    prior = load_map(prior_map if prior_map is not None else scenario.prior_map)

    seq = np.random.SeedSequence(seed)
    rng_sim, rng_mcl = (np.random.default_rng(c) for c in seq.spawn(2))
    spec = SensorSpec()
    rig = SensorRig(spec, rng_sim, wheelbase=params.wheelbase)

    state = VehicleState(pose=scenario.start)
    # gains retuned for the 20 Hz harness loop; the 50 Hz defaults are too hot here
    fw_cfg = FirmwareConfig(kp=0.2, ki=0.7, kd=0.0,
                            loop_rate=scenario.rates.control_hz,
                            vel_cmd_limit=params.wheel_omega_max,
                            steer_cmd_limit=params.delta_max)
    fw = FirmwareState()
    field_ = build_likelihood_field(prior, d_max=loop_config.field_d_max)
    meas_model = MeasurementModel()
    kld = KldParams()
    odom_params = OdometryParams(wheel_radius=params.wheel_radius,
                                 ticks_per_rad=spec.ticks_per_rad)
    ps = init_particles(
        "gaussian", loop_config.n_particles, rng_mcl, pose=scenario.start,
        cov=np.diag(np.square(loop_config.init_sigma)))
    est, _, _ = estimate(ps)

    planner = _Planner(params=params, loop=loop_config)
    rec = _Recorder()
    tol = scenario.tolerances

    control_every = max(1, int(round(1.0 / (scenario.rates.control_hz * SIM_DT))))
    scan_ratio = max(1, int(round(scenario.rates.control_hz / scenario.rates.scan_hz)))
    plan_ratio = max(1, int(round(scenario.rates.control_hz / scenario.rates.plan_hz)))

    actuator = AckermannCommand(0.0, 0.0)
    prev_frame = None
    latest_frame = None
    band = None
    parked = False
    prev_steering = 0.0
    collisions = 0
    cause = "timeout"
    reached = False
    time_to_goal = math.inf

    traj_true = [(0.0, state.pose.x, state.pose.y, state.pose.yaw)]
    traj_est: list[tuple[float, float, float, float]] = []
    rec.state_rows.append((0.0, state.pose.x, state.pose.y, state.pose.yaw,
                           state.v, state.delta, state.wheel_omega))

    n_ticks = int(round(scenario.timeout / SIM_DT))
    for k in range(n_ticks + 1):
        t = k * SIM_DT
        world = advance_world(world, t)

        if k % control_every == 0:
            ctl_idx = k // control_every
            frame = rig.sample(world, state)
            latest_frame = frame

            if ctl_idx % scan_ratio == 0:
                if prev_frame is not None:
                    dt_scan = frame.stamp - prev_frame.stamp
                    dticks = frame.encoder_ticks - prev_frame.encoder_ticks
                    dr = dead_reckon(dticks, frame.imu_yaw_rate, dt_scan, odom_params)
                    od = align_scans(prev_frame.scan, frame.scan, dr.delta, odom_params)
                    rec.odom_rows.append((frame.stamp, od.delta.x, od.delta.y, od.delta.yaw,
                                          od.method, od.cov[0, 0], od.cov[1, 1], od.cov[2, 2]))
                    ps = motion_update(ps, od, rng=rng_mcl)
                ps = measurement_update(ps, frame.scan, field_, meas_model)
                if ps.diverged:
                    cause = "divergence"
                    break
                ps = resample_adaptive(ps, kld, rng_mcl)
                est, cov, conv = estimate(ps)
                rec.pose_rows.append((frame.stamp, est.x, est.y, est.yaw,
                                      cov[0, 0], cov[1, 1], cov[2, 2], len(ps), conv))
                traj_est.append((frame.stamp, est.x, est.y, est.yaw))
                prev_frame = frame

            if ctl_idx % plan_ratio == 0 and not parked:
                band, fatal, diag = planner.plan_cycle(prior, world, est, goal)
                if fatal is not None:
                    cause = fatal
                    break
                if diag is not None:
                    diag["stamp"] = round(t, 6)
                    rec.plan_diagnostics.append(diag)
                if band is not None:
                    cycle = len({row[0] for row in rec.plan_rows}) if rec.plan_rows else 0
                    for i, pose_row in enumerate(band.poses):
                        dt_i = band.dts[i] if i < len(band.dts) else 0.0
                        rec.plan_rows.append((cycle, t, i, pose_row[0], pose_row[1],
                                              pose_row[2], float(dt_i)))

            # stack-side stop decision from the estimated pose
            est_err = _goal_error(est, goal)
            if within_tolerance(est_err, loop_config.stop_fraction * tol.xy,
                                loop_config.stop_fraction * tol.yaw):
                parked = True

            if parked or band is None:
                setpoint = AckermannCommand(prev_steering if not parked else 0.0, 0.0)
            else:
                setpoint = extract_command(band, params, 1.0 / scenario.rates.control_hz,
                                           prev_steering)
                d_goal = math.hypot(est.x - goal.x, est.y - goal.y)
                cap = min(params.v_max,
                          max(loop_config.goal_gain * d_goal, loop_config.creep_speed))
                v = setpoint.wheel_velocity * params.wheel_radius
                v = math.copysign(min(abs(v), cap), v)
                setpoint = AckermannCommand(setpoint.steering, v / params.wheel_radius)
                prev_steering = setpoint.steering

            if latest_frame is not None:
                outputs, fw = run_firmware_cycle(latest_frame, setpoint, fw_cfg, fw)
                actuator = outputs.command
                rec.firmware_rows.append((fw.tick - 1, t, setpoint.wheel_velocity,
                                          latest_frame.actuation_feedback.wheel_velocity,
                                          outputs.effort, setpoint.steering,
                                          latest_frame.actuation_feedback.steering))

            if check_collision(world, state.pose, params.footprint()):
                collisions += 1
                cause = "collision"
                break

            true_err = _goal_error(state.pose, goal)
            if within_tolerance(true_err, tol.xy, tol.yaw) and abs(state.v) < 0.01:
                reached = True
                cause = "success"
                time_to_goal = t
                break

        if k < n_ticks:
            state = step_vehicle(state, actuator, params, SIM_DT)
            traj_true.append((state.stamp, state.pose.x, state.pose.y, state.pose.yaw))
            rec.state_rows.append((state.stamp, state.pose.x, state.pose.y, state.pose.yaw,
                                   state.v, state.delta, state.wheel_omega))

    final_err = _goal_error(state.pose, goal)
    result = TrialResult(
        seed=seed,
        scenario_name=scenario.name,
        goal_reached=reached,
        cause=cause,
        final_pose_error=final_err,
        collision_count=collisions,
        time_to_goal=time_to_goal,
        replan_count=planner.replan_count,
        trajectory_true=np.asarray(traj_true),
        trajectory_estimated=np.asarray(traj_est) if traj_est else np.empty((0, 4)),
    )
    if out_dir is not None:
        rec.write(Path(out_dir))
    return result


def run_replay_stage(scenario: Scenario, recorded_map: str | Path,
                     perturbation: dict | None = None,
                     seed: int = 1, out_dir: str | Path | None = None,
                     params: VehicleParams = VehicleParams(),
                     loop_config: LoopConfig = LoopConfig()) -> TrialResult:
    """Replay stage: live (possibly perturbed) world, stale recorded map."""
    return navigate(scenario, seed, out_dir=out_dir, perturbation=perturbation,
                    prior_map=recorded_map, params=params, loop_config=loop_config)


def run_mapping(scenario: Scenario, seed: int, out_dir: str | Path | None = None,
                params: VehicleParams = VehicleParams(),
                loop_config: LoopConfig = LoopConfig()) -> MappingResult:
    """Drive the waypoint tour on the ground-truth-free pipeline and build a map."""
    if scenario.mode != "mapping":
        raise ValueError("run_mapping() needs a mapping-mode scenario")

    world = _prepare_world(scenario, None)
    base = world.static_map

    seq = np.random.SeedSequence(seed)
    rng_sim, _ = (np.random.default_rng(c) for c in seq.spawn(2))
    spec = SensorSpec()
    rig = SensorRig(spec, rng_sim, wheelbase=params.wheelbase)
    odom_params = OdometryParams(wheel_radius=params.wheel_radius,
                                 ticks_per_rad=spec.ticks_per_rad)

    slam = SlamState.create(base.width, base.height, base.resolution, base.origin)
    slam.pose = scenario.start

    state = VehicleState(pose=scenario.start)
    fw_cfg = FirmwareConfig(kp=0.2, ki=0.7, kd=0.0,
                            loop_rate=scenario.rates.control_hz,
                            vel_cmd_limit=params.wheel_omega_max,
                            steer_cmd_limit=params.delta_max)
    fw = FirmwareState()
    planner = _Planner(params=params, loop=loop_config,
                       inflation=InflationParams(unknown_is_lethal=False))
    rec = _Recorder()

    control_every = max(1, int(round(1.0 / (scenario.rates.control_hz * SIM_DT))))
    scan_ratio = max(1, int(round(scenario.rates.control_hz / scenario.rates.scan_hz)))
    plan_ratio = max(1, int(round(scenario.rates.control_hz / scenario.rates.plan_hz)))

    actuator = AckermannCommand(0.0, 0.0)
    prev_frame = None
    latest_frame = None
    band = None
    prev_steering = 0.0
    waypoint_idx = 0
    cause = "timeout"
    success = False

    traj_true = [(0.0, state.pose.x, state.pose.y, state.pose.yaw)]
    pose_log = [(0.0, slam.pose.x, slam.pose.y, slam.pose.yaw)]

    n_ticks = int(round(scenario.timeout / SIM_DT))
    for k in range(n_ticks + 1):
        t = k * SIM_DT
        world = advance_world(world, t)

        if k % control_every == 0:
            ctl_idx = k // control_every
            frame = rig.sample(world, state)
            latest_frame = frame

            if ctl_idx % scan_ratio == 0:
                if prev_frame is None:
                    od_delta = Pose2()
                else:
                    dt_scan = frame.stamp - prev_frame.stamp
                    dticks = frame.encoder_ticks - prev_frame.encoder_ticks
                    dr = dead_reckon(dticks, frame.imu_yaw_rate, dt_scan, odom_params)
                    od = align_scans(prev_frame.scan, frame.scan, dr.delta, odom_params)
                    od_delta = od.delta
                    rec.odom_rows.append((frame.stamp, od.delta.x, od.delta.y, od.delta.yaw,
                                          od.method, od.cov[0, 0], od.cov[1, 1], od.cov[2, 2]))
                slam = slam_step(slam, frame.scan, od_delta)
                pose_log.append((frame.stamp, slam.pose.x, slam.pose.y, slam.pose.yaw))
                prev_frame = frame

            est = slam.pose
            wp = scenario.tour[waypoint_idx]
            d_wp = math.hypot(est.x - wp.x, est.y - wp.y)
            if d_wp <= loop_config.waypoint_tolerance:
                waypoint_idx += 1
                planner.band = None
                planner.last_cost = math.inf
                if waypoint_idx >= len(scenario.tour):
                    success = True
                    cause = "success"
                    break
                wp = scenario.tour[waypoint_idx]
                d_wp = math.hypot(est.x - wp.x, est.y - wp.y)
            # tour waypoints are position targets; aim along the bearing so
            # every leg stays a forward drive (the sweep covers 360 degrees)
            goal = Pose2(wp.x, wp.y, math.atan2(wp.y - est.y, wp.x - est.x))

            if ctl_idx % plan_ratio == 0:
                snapshot = slam.snapshot_map()
                band, fatal, _ = planner.plan_cycle(snapshot, world, est, goal)
                if fatal is not None:
                    cause = fatal
                    break

            if band is None:
                setpoint = AckermannCommand(prev_steering, 0.0)
            else:
                setpoint = extract_command(band, params, 1.0 / scenario.rates.control_hz,
                                           prev_steering)
                cap = min(params.v_max, max(loop_config.goal_gain * d_wp,
                                            loop_config.creep_speed))
                v = setpoint.wheel_velocity * params.wheel_radius
                v = math.copysign(min(abs(v), cap), v)
                setpoint = AckermannCommand(setpoint.steering, v / params.wheel_radius)
                prev_steering = setpoint.steering

            if latest_frame is not None:
                outputs, fw = run_firmware_cycle(latest_frame, setpoint, fw_cfg, fw)
                actuator = outputs.command

            if check_collision(world, state.pose, params.footprint()):
                cause = "collision"
                break

        if k < n_ticks:
            state = step_vehicle(state, actuator, params, SIM_DT)
            traj_true.append((state.stamp, state.pose.x, state.pose.y, state.pose.yaw))
            rec.state_rows.append((state.stamp, state.pose.x, state.pose.y, state.pose.yaw,
                                   state.v, state.delta, state.wheel_omega))

    result = MappingResult(
        seed=seed,
        scenario_name=scenario.name,
        success=success,
        cause=cause,
        slam=slam,
        trajectory_true=np.asarray(traj_true),
        pose_log=np.asarray(pose_log),
    )
    if out_dir is not None:
        out = Path(out_dir)
        rec.write(out)
        result.map_paths = save_map(slam.map, out / "map")
    return result
