"""Occupancy-grid SLAM: log-odds integration plus coarse-to-fine
Gauss-Newton scan-to-map matching on bilinearly interpolated probability."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core.geometry import Pose2, between, compose, normalize_angle
from ..core.grid import OccupancyGrid, raytrace_cells
from ..core.scan import LaserScan


def logit(p: float) -> float:
    return math.log(p / (1.0 - p))


@dataclass(frozen=True)
class InverseSensorModel:
    p_hit: float = 0.7
    p_free: float = 0.4
    max_use_range: float | None = None   # None -> 0.95 * scan.range_max

    def __post_init__(self) -> None:
        if not 0.5 < self.p_hit < 1.0:
            raise ValueError("p_hit must lie in (0.5, 1)")
        if not 0.0 < self.p_free < 0.5:
            raise ValueError("p_free must lie in (0, 0.5)")

    def use_range(self, scan: LaserScan) -> float:
        return self.max_use_range if self.max_use_range is not None else 0.95 * scan.range_max


@dataclass
class SlamState:
    """Log-odds map plus the coarse-to-fine matching pyramid.

    ``map`` carries the contract semantics (whole-cell log-odds updates);
    the pyramid grids receive the same scans with the hit evidence spread
    bilinearly over the endpoint's four neighbor cells, so the interpolated
    probability used by the matcher peaks at the actual endpoint positions
    instead of at cell centers.
    """

    map: OccupancyGrid
    pyramid: list[OccupancyGrid]
    pose: Pose2
    scan_count: int = 0
    model: InverseSensorModel = field(default_factory=InverseSensorModel)
    n_iter: int = 10
    translation_threshold: float = 0.05
    rotation_threshold: float = 0.05
    pyramid_gain: float = 4.0       # hit-evidence scale on the matching pyramid
    _last_integration_pose: Pose2 | None = None

    @classmethod
    def create(cls, width: int, height: int, resolution: float,
               origin: Pose2 = Pose2(), depth: int = 3,
               pyramid_scale: float = 0.25,
               model: InverseSensorModel | None = None) -> "SlamState":
        """New empty state.  The matching pyramid's finest level runs at
        pyramid_scale * map resolution: interpolation maxima live on lattice
        knots, so matcher bias scales with the matching lattice, not with the
        map lattice."""
        base = OccupancyGrid.empty(width, height, resolution, origin)
        pyramid = []
        fine_res = resolution * pyramid_scale
        fine_w = int(math.ceil(width / pyramid_scale))
        fine_h = int(math.ceil(height / pyramid_scale))
        for k in range(depth):
            f = 2 ** k
            w = (fine_w + f - 1) // f
            h = (fine_h + f - 1) // f
            pyramid.append(OccupancyGrid.empty(w, h, fine_res * f, origin))
        return cls(map=base, pyramid=pyramid, pose=Pose2(),
                   model=model or InverseSensorModel())

    def snapshot_map(self) -> OccupancyGrid:
        """Read-only copy handed to planners/localization."""
        return self.map.copy()


def _densify_chain(points: np.ndarray, max_gap: float, ds: float) -> tuple[np.ndarray, np.ndarray]:
    """Resample the endpoint chain at <= ds spacing (splitting only segments
    shorter than max_gap); returns sample points and per-sample weights that
    preserve one unit of evidence per original endpoint."""
    if len(points) == 0:
        return points, np.empty(0)
    out = [points[0:1]]
    weights = [np.ones(1)]
    for a, b in zip(points[:-1], points[1:]):
        gap = float(np.hypot(*(b - a)))
        if gap > max_gap or gap < 1e-12:
            out.append(b[None, :])
            weights.append(np.ones(1))
            continue
        n = max(1, int(math.ceil(gap / ds)))
        u = (np.arange(1, n + 1) / n)[:, None]
        out.append(a[None, :] * (1 - u) + b[None, :] * u)
        # one endpoint's worth of evidence spread over the inserted samples
        weights.append(np.full(n, 1.0 / n))
    return np.concatenate(out), np.concatenate(weights)


def _smear_hits(grid: OccupancyGrid, points: np.ndarray, l_hit: float) -> None:
    """Deposit hit evidence bilinearly along the densified endpoint chain, so
    the interpolated probability forms a smooth ridge through the endpoints."""
    pts, w_chain = _densify_chain(points, max_gap=6.0 * grid.resolution,
                                  ds=0.5 * grid.resolution)
    if len(pts) == 0:
        return
    local = grid.to_grid_frame(pts) / grid.resolution - 0.5
    i0 = np.floor(local).astype(np.int64)
    frac = local - i0
    fx, fy = frac[:, 0], frac[:, 1]
    for dx, dy, w in ((0, 0, (1 - fx) * (1 - fy)), (1, 0, fx * (1 - fy)),
                      (0, 1, (1 - fx) * fy), (1, 1, fx * fy)):
        ix = i0[:, 0] + dx
        iy = i0[:, 1] + dy
        wt = w * w_chain
        ok = (ix >= 0) & (ix < grid.width) & (iy >= 0) & (iy < grid.height) & (wt > 1e-12)
        np.add.at(grid.log_odds, (iy[ok], ix[ok]), wt[ok] * l_hit)
        grid.observed[iy[ok], ix[ok]] = True


def integrate_scan(state: SlamState, scan: LaserScan, pose: Pose2) -> SlamState:
    """Fold one scan into the map and all pyramid levels at a map-frame pose."""
    use_range = state.model.use_range(scan)
    l_free = logit(state.model.p_free)
    l_hit = logit(state.model.p_hit)

    angles = scan.angles() + pose.yaw
    hits = scan.hit_mask() & (scan.ranges <= use_range)
    reach = np.minimum(scan.ranges, use_range)
    ex = pose.x + reach * np.cos(angles)
    ey = pose.y + reach * np.sin(angles)
    endpoints = np.stack([ex, ey], axis=-1)

    origin_xy = (pose.x, pose.y)
    grid = state.map
    for i in range(scan.n_beams):
        end = (float(ex[i]), float(ey[i]))
        # hit cells are updated separately to avoid double-counting
        for ix, iy in raytrace_cells(grid, origin_xy, end, include_end=not hits[i]):
            grid.log_odds[iy, ix] += l_free
            grid.observed[iy, ix] = True
    cells, inside = grid.cells_of(endpoints[hits])
    np.add.at(grid.log_odds, (cells[inside, 1], cells[inside, 0]), l_hit)
    grid.observed[cells[inside, 1], cells[inside, 0]] = True
    grid.clamp_log_odds()

    # matching pyramid: hit evidence only, spread bilinearly along the
    # endpoint chain so the interpolated ridge follows the endpoints
    for level in state.pyramid:
        _smear_hits(level, endpoints[hits], state.pyramid_gain * l_hit)
        level.clamp_log_odds()
    return state


def _interp_probability(grid: OccupancyGrid, points: np.ndarray
                        ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bilinear probability and its world-frame gradient at points (n, 2).

    Unknown/out-of-lattice samples contribute p = 0.5 with zero gradient.
    """
    local = grid.to_grid_frame(points) / grid.resolution - 0.5
    i0 = np.floor(local).astype(np.int64)
    frac = local - i0
    fx, fy = frac[:, 0], frac[:, 1]

    prob = grid.probability()
    prob = np.where(grid.observed, prob, 0.5)

    def sample(ixs: np.ndarray, iys: np.ndarray) -> np.ndarray:
        valid = (ixs >= 0) & (ixs < grid.width) & (iys >= 0) & (iys < grid.height)
        out = np.full(ixs.shape, 0.5)
        out[valid] = prob[iys[valid], ixs[valid]]
        return out

    m00 = sample(i0[:, 0], i0[:, 1])
    m10 = sample(i0[:, 0] + 1, i0[:, 1])
    m01 = sample(i0[:, 0], i0[:, 1] + 1)
    m11 = sample(i0[:, 0] + 1, i0[:, 1] + 1)

    value = (m00 * (1 - fx) * (1 - fy) + m10 * fx * (1 - fy)
             + m01 * (1 - fx) * fy + m11 * fx * fy)
    scale = 1.0 / grid.resolution
    gx_local = scale * ((1 - fy) * (m10 - m00) + fy * (m11 - m01))
    gy_local = scale * ((1 - fx) * (m01 - m00) + fx * (m11 - m10))
    c, s = math.cos(grid.origin.yaw), math.sin(grid.origin.yaw)
    gx = c * gx_local - s * gy_local
    gy = s * gx_local + c * gy_local
    return value, gx, gy


def _match_on_level(grid: OccupancyGrid, points_body: np.ndarray, guess: Pose2,
                    n_iter: int) -> tuple[Pose2, bool, float]:
    def evaluate(x: float, y: float, yaw: float):
        c, s = math.cos(yaw), math.sin(yaw)
        wx = x + c * points_body[:, 0] - s * points_body[:, 1]
        wy = y + s * points_body[:, 0] + c * points_body[:, 1]
        value, gx, gy = _interp_probability(grid, np.stack([wx, wy], axis=-1))
        return value, gx, gy, float(np.sum((1.0 - value) ** 2))

    def score_of(p: Pose2) -> float:
        return float(evaluate(p.x, p.y, p.yaw)[0].mean())

    x, y, yaw = guess.x, guess.y, guess.yaw
    value, gx, gy, cost = evaluate(x, y, yaw)
    converged = False
    for _ in range(n_iter):
        c, s = math.cos(yaw), math.sin(yaw)
        r = 1.0 - value
        # d(world point)/d(yaw)
        dpx = -points_body[:, 0] * s - points_body[:, 1] * c
        dpy = points_body[:, 0] * c - points_body[:, 1] * s
        j_yaw = gx * dpx + gy * dpy
        jac = np.stack([gx, gy, j_yaw], axis=-1)

        hess = jac.T @ jac
        rhs = jac.T @ r
        eigs = np.linalg.eigvalsh(hess)
        if eigs[-1] <= 0.0 or eigs[0] <= 1e-12 * eigs[-1]:
            # degenerate normal matrix (rank < 3): no usable gradient
            return guess, False, score_of(guess)
        if eigs[-1] / max(eigs[0], 1e-300) > 1e6:
            hess = hess + 1e-3 * eigs[-1] * np.eye(3)
        step = np.linalg.solve(hess, rhs)

        # backtrack: keep the Gauss-Newton direction but never accept a
        # cost increase (the interpolated surface is only piecewise smooth)
        accepted = False
        scale = 1.0
        for _ in range(5):
            nx = x + scale * step[0]
            ny = y + scale * step[1]
            nyaw = normalize_angle(yaw + scale * step[2])
            n_value, n_gx, n_gy, n_cost = evaluate(nx, ny, nyaw)
            if n_cost < cost:
                x, y, yaw = nx, ny, nyaw
                value, gx, gy, cost = n_value, n_gx, n_gy, n_cost
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            converged = True
            break
        if scale * float(np.linalg.norm(step)) < 1e-4:
            converged = True
            break
    score = float(value.mean())
    return Pose2(x, y, yaw), converged, score


def match_scan_to_map(state: SlamState, scan: LaserScan, guess: Pose2
                      ) -> tuple[Pose2, bool, float]:
    """Coarse-to-fine Gauss-Newton alignment of scan endpoints to the map.

    Returns (pose, converged, score) where score is the mean interpolated
    occupancy probability under the matched endpoints.  A degenerate normal
    matrix (featureless map) returns the guess unconverged.
    """
    if state.scan_count < 1:
        return guess, False, 0.0
    use_range = state.model.use_range(scan)
    mask = scan.hit_mask() & (scan.ranges <= use_range)
    if not mask.any():
        return guess, False, 0.0
    a = scan.angles()[mask]
    r = scan.ranges[mask]
    points_body = np.stack([r * np.cos(a), r * np.sin(a)], axis=-1)

    pose = guess
    converged = False
    score = 0.0
    for level in reversed(state.pyramid):
        pose, converged, score = _match_on_level(level, points_body, pose, state.n_iter)
    return pose, converged, score


def slam_step(state: SlamState, scan: LaserScan, odom_delta: Pose2) -> SlamState:
    """One SLAM update: odometry prior, scan match, threshold-gated integration."""
    guess = compose(state.pose, odom_delta)
    if state.scan_count == 0:
        integrate_scan(state, scan, guess)
        state.pose = guess
        state.scan_count = 1
        state._last_integration_pose = guess
        return state

    matched, converged, _ = match_scan_to_map(state, scan, guess)
    pose = matched if converged else guess
    state.pose = pose

    motion = between(state._last_integration_pose, pose)
    if (math.hypot(motion.x, motion.y) >= state.translation_threshold
            or abs(motion.yaw) >= state.rotation_threshold):
        integrate_scan(state, scan, pose)
        state.scan_count += 1
        state._last_integration_pose = pose
    return state
