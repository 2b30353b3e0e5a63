"""Timed-elastic-band local trajectory optimization with reverse support.

The band is a pose sequence B_0..B_n (endpoints fixed) with n positive time
differences.  A damped Gauss-Newton (Levenberg-Marquardt) loop minimizes the
sum of squared penalty residuals:

* time:          sqrt(w_time) * dT_i
* velocity:      sqrt(w_vel)  * max(0, |v_i| - v_max),  v_i = signed d_i / dT_i
* acceleration:  sqrt(w_acc)  * max(0, |a_i| - a_max)
* kinematics:    sqrt(w_kin)  * [(cos t_i + cos t_j) dy - (sin t_i + sin t_j) dx]
* turning:       sqrt(w_turn) * max(0, |k_i| - k_bound),  k_i = dtheta_i / d_i
* obstacles:     sqrt(w_obs)  * max(0, d_safe + epsilon - dist(B_i, nearest))

The turning bound is pulled 5% inside tan(delta_max)/wheelbase so the soft
optimum clears the hard feasibility check.  Rejected LM steps never mutate
the band; accepted steps are monotone in the objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from ..core.geometry import AckermannCommand, Pose2, VehicleParams, normalize_angle
from ..core.polygons import footprint_hits_grid
from .astar import PlanningError
from .costmap import Costmap

KAPPA_MARGIN = 0.05


class DegenerateBandError(PlanningError):
    pass


@dataclass(frozen=True)
class TebWeights:
    w_time: float = 1.0
    w_vel: float = 2.0
    w_acc: float = 1.0
    w_kin: float = 1000.0
    w_turn: float = 50.0
    w_obs: float = 50.0
    epsilon: float = 0.02

    def __post_init__(self) -> None:
        vals = (self.w_time, self.w_vel, self.w_acc, self.w_kin, self.w_turn, self.w_obs)
        if any(v < 0 for v in vals):
            raise ValueError("weights must be nonnegative")
        if not any(v > 0 for v in vals):
            raise ValueError("at least one weight must be positive")


@dataclass(frozen=True)
class TebConfig:
    dt_min: float = 0.1
    dt_max: float = 0.4
    outer_iters: int = 4
    inner_iters: int = 8
    d_safe: float | None = None          # None -> half the footprint diagonal
    spacing: float = 0.15                # band initialization waypoint spacing
    obstacle_window: float = 1.5

    def safe_distance(self, params: VehicleParams) -> float:
        if self.d_safe is not None:
            return self.d_safe
        return 0.5 * math.hypot(params.length, params.width)


@dataclass
class ElasticBand:
    """Pose sequence under optimization; poses is (n+1, 3), dts is (n,)."""

    poses: np.ndarray
    dts: np.ndarray

    def __post_init__(self) -> None:
        self.poses = np.asarray(self.poses, dtype=np.float64)
        self.dts = np.asarray(self.dts, dtype=np.float64)
        if len(self.poses) < 2 or len(self.dts) != len(self.poses) - 1:
            raise DegenerateBandError("band needs at least two poses and matching dts")
        if np.any(self.dts <= 0):
            raise ValueError("time differences must be positive")

    def copy(self) -> "ElasticBand":
        return ElasticBand(self.poses.copy(), self.dts.copy())

    @property
    def start(self) -> Pose2:
        return Pose2(*self.poses[0])

    @property
    def goal(self) -> Pose2:
        return Pose2(*self.poses[-1])


@dataclass
class TebDiagnostics:
    term_costs: dict[str, float] = field(default_factory=dict)
    cost_history: list[float] = field(default_factory=list)
    accepted_steps: int = 0
    rejected_steps: int = 0
    feasibility_flags: dict[str, bool] = field(default_factory=dict)


@dataclass(frozen=True)
class BandViolation:
    kind: str          # "collision" | "curvature"
    pose_index: int
    value: float = 0.0


def _segment_geometry(poses: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    diff = poses[1:, :2] - poses[:-1, :2]
    dist = np.linalg.norm(diff, axis=1)
    unit = np.zeros_like(diff)
    ok = dist > 1e-12
    unit[ok] = diff[ok] / dist[ok, None]
    heading = np.stack([np.cos(poses[:-1, 2]), np.sin(poses[:-1, 2])], axis=-1)
    sign = np.where(np.einsum("ij,ij->i", heading, diff) >= 0.0, 1.0, -1.0)
    return diff, dist, unit, sign


def signed_velocities(band: ElasticBand) -> np.ndarray:
    """Per-segment signed speed; negative for reverse motion."""
    _, dist, _, sign = _segment_geometry(band.poses)
    return sign * dist / band.dts


def _wrap(a: np.ndarray) -> np.ndarray:
    r = np.remainder(a + math.pi, 2.0 * math.pi) - math.pi
    r[r <= -math.pi] += 2.0 * math.pi
    return r


class _Problem:
    """Residual/Jacobian assembly over the free band parameters.

    Free parameters: interior poses (x, y, theta) then all dts; endpoints
    stay fixed.  Hinge terms use one-sided derivatives (zero when inactive).
    """

    def __init__(self, band: ElasticBand, params: VehicleParams, weights: TebWeights,
                 obstacles: np.ndarray, config: TebConfig):
        self.n_poses = len(band.poses)
        self.n_dts = len(band.dts)
        self.params = params
        self.w = weights
        self.config = config
        self.kappa_bound = params.kappa_max * (1.0 - KAPPA_MARGIN)
        self.d_safe = config.safe_distance(params)
        self.obstacles = np.asarray(obstacles, dtype=np.float64).reshape(-1, 2)
        self.tree = cKDTree(self.obstacles) if len(self.obstacles) else None

    @property
    def n_free(self) -> int:
        return 3 * (self.n_poses - 2) + self.n_dts

    def pack(self, band: ElasticBand) -> np.ndarray:
        return np.concatenate([band.poses[1:-1].ravel(), band.dts])

    def unpack(self, band: ElasticBand, x: np.ndarray) -> ElasticBand:
        poses = band.poses.copy()
        k = 3 * (self.n_poses - 2)
        if k:
            poses[1:-1] = x[:k].reshape(-1, 3)
        dts = np.maximum(x[k:], 1e-2)
        return ElasticBand(poses, dts)

    def _pose_col(self, i: int) -> int | None:
        """Column of pose i's x coordinate, or None if the pose is fixed."""
        if i == 0 or i == self.n_poses - 1:
            return None
        return 3 * (i - 1)

    def _dt_col(self, i: int) -> int:
        return 3 * (self.n_poses - 2) + i

    def residuals(self, band: ElasticBand, with_jacobian: bool = False
                  ) -> tuple[np.ndarray, np.ndarray | None, dict[str, float]]:
        poses, dts = band.poses, band.dts
        diff, dist, unit, sign = _segment_geometry(poses)
        theta = poses[:, 2]
        dtheta = _wrap(theta[1:] - theta[:-1])
        v = sign * dist / dts

        rows: list[float] = []
        jac_rows: list[dict[int, float]] = []
        term_costs = {k: 0.0 for k in ("time", "velocity", "acceleration",
                                       "kinematics", "turning", "obstacles")}

        def add(term: str, value: float, grads: dict[int, float]) -> None:
            rows.append(value)
            term_costs[term] += value * value
            if with_jacobian:
                jac_rows.append(grads)

        sw_time = math.sqrt(self.w.w_time)
        sw_vel = math.sqrt(self.w.w_vel)
        sw_acc = math.sqrt(self.w.w_acc)
        sw_kin = math.sqrt(self.w.w_kin)
        sw_turn = math.sqrt(self.w.w_turn)
        sw_obs = math.sqrt(self.w.w_obs)

        n_seg = self.n_dts
        for i in range(n_seg):
            # time
            add("time", sw_time * dts[i], {self._dt_col(i): sw_time})

            ci, cj = self._pose_col(i), self._pose_col(i + 1)
            ux, uy = unit[i]

            # velocity overshoot (|v| = d / dt)
            over = dist[i] / dts[i] - self.params.v_max
            if over > 0.0:
                grads = {self._dt_col(i): -sw_vel * dist[i] / dts[i] ** 2}
                if ci is not None:
                    grads[ci] = -sw_vel * ux / dts[i]
                    grads[ci + 1] = -sw_vel * uy / dts[i]
                if cj is not None:
                    grads[cj] = sw_vel * ux / dts[i]
                    grads[cj + 1] = sw_vel * uy / dts[i]
                add("velocity", sw_vel * over, grads)

            # nonholonomic kinematics (equal turning arc, reverse-symmetric)
            csum = math.cos(theta[i]) + math.cos(theta[i + 1])
            ssum = math.sin(theta[i]) + math.sin(theta[i + 1])
            g = csum * diff[i, 1] - ssum * diff[i, 0]
            grads = {}
            if ci is not None:
                grads[ci] = sw_kin * ssum
                grads[ci + 1] = -sw_kin * csum
                grads[ci + 2] = sw_kin * (-math.sin(theta[i]) * diff[i, 1]
                                          - math.cos(theta[i]) * diff[i, 0])
            if cj is not None:
                grads[cj] = -sw_kin * ssum
                grads[cj + 1] = sw_kin * csum
                grads[cj + 2] = sw_kin * (-math.sin(theta[i + 1]) * diff[i, 1]
                                          - math.cos(theta[i + 1]) * diff[i, 0])
            add("kinematics", sw_kin * g, grads)

            # turning radius overshoot
            if dist[i] > 1e-9:
                kappa = dtheta[i] / dist[i]
                over = abs(kappa) - self.kappa_bound
                if over > 0.0:
                    sk = 1.0 if kappa >= 0 else -1.0
                    grads = {}
                    dk_dd = -abs(kappa) / dist[i]
                    if ci is not None:
                        grads[ci] = sw_turn * dk_dd * (-ux)
                        grads[ci + 1] = sw_turn * dk_dd * (-uy)
                        grads[ci + 2] = sw_turn * (-sk / dist[i])
                    if cj is not None:
                        grads[cj] = sw_turn * dk_dd * ux
                        grads[cj + 1] = sw_turn * dk_dd * uy
                        grads[cj + 2] = sw_turn * (sk / dist[i])
                    add("turning", sw_turn * over, grads)

        # acceleration overshoot across consecutive segments
        for i in range(n_seg - 1):
            half = 0.5 * (dts[i] + dts[i + 1])
            a = (v[i + 1] - v[i]) / half
            over = abs(a) - self.params.a_max
            if over <= 0.0:
                continue
            sa = 1.0 if a >= 0 else -1.0
            c0, c1, c2 = self._pose_col(i), self._pose_col(i + 1), self._pose_col(i + 2)
            grads = {}

            def dv_dp(seg: int, which_end: int) -> tuple[float, float]:
                # derivative of signed v_seg w.r.t. segment endpoint position
                scale = sign[seg] / dts[seg]
                ux_, uy_ = unit[seg]
                if which_end == 0:
                    return (-scale * ux_, -scale * uy_)
                return (scale * ux_, scale * uy_)

            if c0 is not None:
                gx, gy = dv_dp(i, 0)
                grads[c0] = sw_acc * sa * (-gx) / half
                grads[c0 + 1] = sw_acc * sa * (-gy) / half
            if c1 is not None:
                gx0, gy0 = dv_dp(i, 1)
                gx1, gy1 = dv_dp(i + 1, 0)
                grads[c1] = sw_acc * sa * (gx1 - gx0) / half
                grads[c1 + 1] = sw_acc * sa * (gy1 - gy0) / half
            if c2 is not None:
                gx, gy = dv_dp(i + 1, 1)
                grads[c2] = sw_acc * sa * gx / half
                grads[c2 + 1] = sw_acc * sa * gy / half
            grads[self._dt_col(i)] = sw_acc * sa * ((v[i] / dts[i]) / half - a / (2 * half))
            grads[self._dt_col(i + 1)] = sw_acc * sa * ((-v[i + 1] / dts[i + 1]) / half
                                                        - a / (2 * half))
            add("acceleration", sw_acc * over, grads)

        # obstacle clearance for interior poses
        if self.tree is not None:
            margin = self.d_safe + self.w.epsilon
            for i in range(1, self.n_poses - 1):
                d, j = self.tree.query(poses[i, :2])
                pen = margin - d
                if pen <= 0.0:
                    continue
                ci = self._pose_col(i)
                grads = {}
                if d > 1e-9 and ci is not None:
                    nx = (poses[i, 0] - self.obstacles[j, 0]) / d
                    ny = (poses[i, 1] - self.obstacles[j, 1]) / d
                    grads[ci] = -sw_obs * nx
                    grads[ci + 1] = -sw_obs * ny
                add("obstacles", sw_obs * pen, grads)

        r = np.asarray(rows, dtype=np.float64)
        if not with_jacobian:
            return r, None, term_costs
        jac = np.zeros((len(rows), self.n_free))
        for row, grads in enumerate(jac_rows):
            for col, val in grads.items():
                jac[row, col] = val
        return r, jac, term_costs


def _autoresize(band: ElasticBand, config: TebConfig) -> ElasticBand:
    """Insert midpoints where dT > dT_max, drop poses where dT < dT_min."""
    poses = [row.copy() for row in band.poses]
    dts = list(band.dts)
    for _ in range(16):
        changed = False
        i = 0
        while i < len(dts):
            if dts[i] > config.dt_max + 1e-12:
                p0, p1 = poses[i], poses[i + 1]
                mid = 0.5 * (p0[:2] + p1[:2])
                yaw = normalize_angle(p0[2] + 0.5 * normalize_angle(p1[2] - p0[2]))
                poses.insert(i + 1, np.array([mid[0], mid[1], yaw]))
                half = 0.5 * dts[i]
                dts[i] = half
                dts.insert(i + 1, half)
                changed = True
            i += 1
        i = 0
        while i < len(dts) and len(poses) > 2:
            if dts[i] < config.dt_min - 1e-12:
                if i + 1 <= len(dts) - 1:
                    # merge into the following segment, dropping interior pose i+1
                    dts[i + 1] += dts[i]
                    del dts[i]
                    del poses[i + 1]
                elif i > 0:
                    dts[i - 1] += dts[i]
                    del dts[i]
                    del poses[i]
                else:
                    dts[i] = config.dt_min
                changed = True
                continue
            i += 1
        if not changed:
            break
    if len(poses) < 2:
        raise DegenerateBandError("band collapsed below two poses")
    return ElasticBand(np.asarray(poses), np.asarray(dts))


def teb_optimize(band: ElasticBand, cm: Costmap | None, params: VehicleParams,
                 weights: TebWeights = TebWeights(),
                 obstacles: np.ndarray | None = None,
                 config: TebConfig = TebConfig()) -> tuple[ElasticBand, TebDiagnostics]:
    """Optimize the band in place of the caller's copy; endpoints stay fixed.

    Runs ``outer_iters`` rounds of autoresize followed by a Levenberg-
    Marquardt descent; the returned diagnostics carry per-term costs, the
    accepted-cost history and feasibility flags.
    """
    if len(band.poses) < 2:
        raise DegenerateBandError("band needs at least two poses")
    obstacles = np.empty((0, 2)) if obstacles is None else np.asarray(obstacles, dtype=np.float64)
    diag = TebDiagnostics()
    band = band.copy()

    lam = 1e-4
    for _ in range(config.outer_iters):
        band = _autoresize(band, config)
        problem = _Problem(band, params, weights, obstacles, config)
        if problem.n_free == 0:
            break
        x = problem.pack(band)
        r, jac, _ = problem.residuals(band, with_jacobian=True)
        cost = float(r @ r)
        diag.cost_history.append(cost)

        for _ in range(config.inner_iters):
            a = jac.T @ jac
            g = jac.T @ r
            d = np.diag(a).copy()
            d[d < 1e-12] = 1e-12
            try:
                step = np.linalg.solve(a + lam * np.diag(d), -g)
            except np.linalg.LinAlgError:
                lam *= 4.0
                continue
            cand = problem.unpack(band, x + step)
            r_new = problem.residuals(cand, with_jacobian=False)[0]
            cost_new = float(r_new @ r_new)
            if cost_new < cost:
                band = cand
                x = problem.pack(band)
                r, jac, _ = problem.residuals(band, with_jacobian=True)
                cost = float(r @ r)
                diag.cost_history.append(cost)
                diag.accepted_steps += 1
                lam = max(lam / 3.0, 1e-10)
                if np.linalg.norm(step) < 1e-8:
                    break
            else:
                diag.rejected_steps += 1
                lam *= 4.0

    problem = _Problem(band, params, weights, obstacles, config)
    _, _, term_costs = problem.residuals(band, with_jacobian=False)
    diag.term_costs = term_costs
    _, dist, _, _ = _segment_geometry(band.poses)
    dtheta = _wrap(band.poses[1:, 2] - band.poses[:-1, 2])
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa = np.where(dist > 1e-9, np.abs(dtheta) / np.maximum(dist, 1e-12), 0.0)
    sp = np.abs(dist / band.dts)
    diag.feasibility_flags = {
        "velocity_ok": bool(np.all(sp <= params.v_max + 1e-6)),
        "turning_ok": bool(np.all(kappa <= params.kappa_max + 1e-6)),
        "kinematics_ok": bool(term_costs["kinematics"] < 1e-4 * max(weights.w_kin, 1.0)),
        "obstacles_ok": bool(term_costs["obstacles"] == 0.0),
    }
    return band, diag


def check_feasibility(band: ElasticBand, cm: Costmap,
                      footprint: list[tuple[float, float]],
                      kappa_max: float) -> tuple[bool, BandViolation | None]:
    """Collision- and curvature-check the band at <= resolution spacing."""
    poses = band.poses
    _, dist, _, _ = _segment_geometry(poses)
    dtheta = _wrap(poses[1:, 2] - poses[:-1, 2])
    for i in range(len(dist)):
        if dist[i] > 1e-9 and abs(dtheta[i]) / dist[i] > kappa_max + 1e-6:
            return False, BandViolation("curvature", i, float(abs(dtheta[i]) / dist[i]))

    step = cm.base.resolution
    for i in range(len(poses) - 1):
        n_sub = max(1, int(math.ceil(dist[i] / step)))
        for k in range(n_sub + 1):
            u = k / n_sub
            pose = Pose2(
                poses[i, 0] + u * (poses[i + 1, 0] - poses[i, 0]),
                poses[i, 1] + u * (poses[i + 1, 1] - poses[i, 1]),
                normalize_angle(poses[i, 2] + u * dtheta[i]),
            )
            if footprint_hits_grid(cm.base, cm.lethal, pose, footprint):
                return False, BandViolation("collision", i)
    return True, None


def extract_command(band: ElasticBand, params: VehicleParams, control_horizon: float,
                    prev_steering: float = 0.0) -> AckermannCommand:
    """Ackermann command from the leading band segment(s).

    v and omega come from the motion across the first segment (or across the
    segments covering control_horizon when it exceeds dT_0); steering is
    atan(wheelbase * omega / v) and everything is saturated to the limits.
    """
    if band.dts[0] <= 0:
        raise ValueError("leading time difference must be positive")
    horizon = max(control_horizon, 0.0)
    t_acc = 0.0
    dist_acc = 0.0
    yaw_acc = 0.0
    for i in range(len(band.dts)):
        seg = band.poses[i + 1, :2] - band.poses[i, :2]
        d = float(np.linalg.norm(seg))
        heading = np.array([math.cos(band.poses[i, 2]), math.sin(band.poses[i, 2])])
        s = 1.0 if float(heading @ seg) >= 0.0 else -1.0
        dist_acc += s * d
        yaw_acc += normalize_angle(band.poses[i + 1, 2] - band.poses[i, 2])
        t_acc += band.dts[i]
        if t_acc >= horizon:
            break

    v = dist_acc / t_acc
    omega = yaw_acc / t_acc
    v_eps = 1e-3
    if abs(v) > v_eps:
        steering = math.atan(params.wheelbase * omega / v)
    else:
        steering = prev_steering
        v = 0.0

    steering = max(-params.delta_max, min(params.delta_max, steering))
    v = max(-params.v_max, min(params.v_max, v))
    wheel_velocity = v / params.wheel_radius
    wheel_velocity = max(-params.wheel_omega_max, min(params.wheel_omega_max, wheel_velocity))
    return AckermannCommand(steering=steering, wheel_velocity=wheel_velocity)


def init_band(path_xy: list[tuple[float, float]], start: Pose2, goal: Pose2,
              params: VehicleParams, config: TebConfig = TebConfig(),
              reverse: bool | None = None) -> ElasticBand:
    """Seed a band from a global path: resampled waypoints, tangent yaws,
    dT from half the velocity limit.  Reverse maneuvers (goal yaw opposing
    the approach direction by more than pi/2) get flipped headings."""
    # skip path points within half a cell of either endpoint: the quantized
    # cell centers can jog against the travel direction and flip segment signs
    goal_xy = np.array([goal.x, goal.y])
    start_xy = np.array([start.x, start.y])
    pts = [start_xy]
    for p in path_xy:
        q = np.asarray(p, dtype=np.float64)
        if (np.linalg.norm(q - pts[-1]) > 1e-9
                and np.linalg.norm(q - start_xy) > 0.05
                and np.linalg.norm(q - goal_xy) > 0.05):
            pts.append(q)
    if np.linalg.norm(goal_xy - pts[-1]) > 1e-9:
        pts.append(goal_xy)

    # resample at <= spacing
    resampled = [pts[0]]
    for a, b in zip(pts, pts[1:]):
        seg = b - a
        d = float(np.linalg.norm(seg))
        n = max(1, int(math.ceil(d / config.spacing)))
        for k in range(1, n + 1):
            resampled.append(a + seg * (k / n))

    if len(resampled) < 2:
        resampled = [pts[0], goal_xy]
    arr = np.asarray(resampled)

    tangents = arr[1:] - arr[:-1]
    seg_yaw = np.arctan2(tangents[:, 1], tangents[:, 0])
    if reverse is None:
        approach = seg_yaw[-1]
        reverse = abs(normalize_angle(goal.yaw - approach)) > math.pi / 2
    if reverse:
        seg_yaw = np.array([normalize_angle(a + math.pi) for a in seg_yaw])

    yaws = np.empty(len(arr))
    yaws[0] = start.yaw
    yaws[-1] = goal.yaw
    for i in range(1, len(arr) - 1):
        yaws[i] = normalize_angle(
            seg_yaw[i - 1] + 0.5 * normalize_angle(seg_yaw[i] - seg_yaw[i - 1]))

    poses = np.column_stack([arr, yaws])
    dist = np.linalg.norm(arr[1:] - arr[:-1], axis=1)
    dts = np.clip(dist / (0.5 * params.v_max), config.dt_min, config.dt_max)
    return ElasticBand(poses=poses, dts=dts)
