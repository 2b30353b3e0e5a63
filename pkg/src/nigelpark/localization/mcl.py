"""Adaptive Monte-Carlo localization against a prior occupancy map.

Particle poses live in a (n, 3) float array [x, y, yaw]; weights are kept
normalized to sum 1 after every update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from ..core.geometry import Pose2, normalize_angle
from ..core.grid import OccupancyGrid
from ..core.scan import LaserScan
from .likelihood_field import LikelihoodField

DEFAULT_ALPHAS = (0.1, 0.1, 0.05, 0.05)


@dataclass(frozen=True)
class ParticleSet:
    poses: np.ndarray = field(repr=False)     # (n, 3)
    weights: np.ndarray = field(repr=False)   # (n,)
    n_min: int = 100
    n_max: int = 3000
    stamp: float = 0.0
    diverged: bool = False

    def __post_init__(self) -> None:
        if len(self.poses) != len(self.weights):
            raise ValueError("poses and weights must have equal length")
        if not (self.n_min <= len(self.poses) <= self.n_max):
            raise ValueError("particle count outside [n_min, n_max]")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")

    def __len__(self) -> int:
        return len(self.poses)


@dataclass(frozen=True)
class MeasurementModel:
    z_hit: float = 0.95
    z_rand: float = 0.05
    sigma_hit: float = 0.05
    beam_subsample: int = 60


@dataclass(frozen=True)
class KldParams:
    epsilon: float = 0.05
    delta: float = 0.01
    bin_xy: float = 0.1
    bin_yaw: float = 0.175


def init_particles(mode: str, n: int, rng: np.random.Generator, *,
                   grid: OccupancyGrid | None = None,
                   pose: Pose2 | None = None,
                   cov: np.ndarray | None = None,
                   n_min: int = 100, n_max: int = 3000,
                   stamp: float = 0.0) -> ParticleSet:
    """Initial belief: "uniform" over map free space or "gaussian" around a pose."""
    if not (n_min <= n <= n_max):
        raise ValueError("n must lie within [n_min, n_max]")
    if mode == "uniform":
        if grid is None:
            raise ValueError("uniform mode needs a map")
        free = np.argwhere(grid.free_mask())           # rows of (iy, ix)
        if len(free) == 0:
            raise ValueError("map has no free cells")
        pick = rng.integers(0, len(free), size=n)
        offset = rng.random((n, 2))
        cells = free[pick][:, ::-1].astype(np.float64)  # -> (ix, iy)
        local = (cells + offset) * grid.resolution
        c, s = math.cos(grid.origin.yaw), math.sin(grid.origin.yaw)
        x = grid.origin.x + c * local[:, 0] - s * local[:, 1]
        y = grid.origin.y + s * local[:, 0] + c * local[:, 1]
        yaw = math.pi - rng.uniform(0.0, 2.0 * math.pi, size=n)   # in (-pi, pi]
        poses = np.stack([x, y, yaw], axis=-1)
    elif mode == "gaussian":
        if pose is None or cov is None:
            raise ValueError("gaussian mode needs pose and cov")
        cov = np.asarray(cov, dtype=np.float64)
        if cov.shape != (3, 3) or not np.allclose(cov, cov.T, atol=1e-12):
            raise ValueError("cov must be a symmetric 3x3 matrix")
        eigvals, eigvecs = np.linalg.eigh(cov)
        if np.any(eigvals < -1e-12):
            raise ValueError("cov must be positive semidefinite")
        scale = eigvecs @ np.diag(np.sqrt(np.maximum(eigvals, 0.0)))
        z = rng.standard_normal((n, 3))
        poses = np.array([pose.x, pose.y, pose.yaw]) + z @ scale.T
        poses[:, 2] = _normalize_angles(poses[:, 2])
    else:
        raise ValueError(f"unknown init mode {mode!r}")
    weights = np.full(n, 1.0 / n)
    return ParticleSet(poses=poses, weights=weights, n_min=n_min, n_max=n_max, stamp=stamp)


def _normalize_angles(a: np.ndarray) -> np.ndarray:
    r = np.remainder(a + math.pi, 2.0 * math.pi) - math.pi
    r[r <= -math.pi] += 2.0 * math.pi
    return r


def motion_update(ps: ParticleSet, d, alphas: tuple[float, float, float, float] = DEFAULT_ALPHAS,
                  rng: np.random.Generator | None = None) -> ParticleSet:
    """Sample the four-parameter odometry noise model around a delta.

    Accepts an OdometryDelta or a bare Pose2.  The rot-trans-rot decomposition
    flips for reversing motion so that backing up is not treated as a pair of
    half-turns.
    """
    delta = getattr(d, "delta", d)
    if rng is None:
        rng = np.random.default_rng(0)
    a1, a2, a3, a4 = alphas

    trans = math.hypot(delta.x, delta.y)
    rot1 = math.atan2(delta.y, delta.x) if trans > 1e-12 else 0.0
    if abs(rot1) > math.pi / 2:     # reverse segment
        rot1 = normalize_angle(rot1 - math.pi)
        trans = -trans
    rot2 = normalize_angle(delta.yaw - rot1)

    sigma_rot1 = math.sqrt(a1 * rot1**2 + a2 * trans**2)
    sigma_trans = math.sqrt(a3 * trans**2 + a4 * (rot1**2 + rot2**2))
    sigma_rot2 = math.sqrt(a1 * rot2**2 + a2 * trans**2)

    n = len(ps)
    z = rng.standard_normal((n, 3))
    r1 = rot1 + sigma_rot1 * z[:, 0]
    t = trans + sigma_trans * z[:, 1]
    r2 = rot2 + sigma_rot2 * z[:, 2]

    poses = ps.poses.copy()
    heading = poses[:, 2] + r1
    poses[:, 0] += t * np.cos(heading)
    poses[:, 1] += t * np.sin(heading)
    poses[:, 2] = _normalize_angles(poses[:, 2] + r1 + r2)
    return replace(ps, poses=poses)


def measurement_update(ps: ParticleSet, scan: LaserScan, field_: LikelihoodField,
                       model: MeasurementModel = MeasurementModel()) -> ParticleSet:
    """Likelihood-field reweighting over a deterministic beam subsample."""
    n_beams = scan.n_beams
    step = max(1, n_beams // model.beam_subsample)
    idx = np.arange(0, n_beams, step)[: model.beam_subsample]
    mask = scan.hit_mask()[idx]
    idx = idx[mask]
    if len(idx) == 0:
        # no informative beams: weights unchanged (but renormalized)
        total = ps.weights.sum()
        if total <= 0.0:
            n = len(ps)
            return replace(ps, weights=np.full(n, 1.0 / n), diverged=True)
        return replace(ps, weights=ps.weights / total)

    a = scan.angles()[idx]
    r = scan.ranges[idx]
    body = np.stack([r * np.cos(a), r * np.sin(a)], axis=-1)      # (k, 2)

    yaw = ps.poses[:, 2]
    c, s = np.cos(yaw), np.sin(yaw)
    ex = ps.poses[:, 0:1] + c[:, None] * body[:, 0] - s[:, None] * body[:, 1]
    ey = ps.poses[:, 1:2] + s[:, None] * body[:, 0] + c[:, None] * body[:, 1]
    dist = field_.distance_at(np.stack([ex, ey], axis=-1))         # (n, k)

    norm = 1.0 / (model.sigma_hit * math.sqrt(2.0 * math.pi))
    p_beam = (model.z_hit * norm * np.exp(-0.5 * (dist / model.sigma_hit) ** 2)
              + model.z_rand / scan.range_max)
    with np.errstate(divide="ignore"):
        log_w = np.log(ps.weights) + np.log(p_beam).sum(axis=1)

    finite = np.isfinite(log_w)
    if not finite.any():
        n = len(ps)
        return replace(ps, weights=np.full(n, 1.0 / n), diverged=True)
    shifted = np.exp(log_w - log_w[finite].max())
    shifted[~finite] = 0.0
    total = shifted.sum()
    if total <= 0.0:
        n = len(ps)
        return replace(ps, weights=np.full(n, 1.0 / n), diverged=True)
    return replace(ps, weights=shifted / total, diverged=False)


def kld_sample_count(k: int, params: KldParams) -> int:
    """Particle count bounding the KL divergence to the binned belief."""
    if k <= 1:
        return 1
    z = stats.norm.ppf(1.0 - params.delta)
    a = 2.0 / (9.0 * (k - 1))
    n = (k - 1) / (2.0 * params.epsilon) * (1.0 - a + math.sqrt(a) * z) ** 3
    return int(math.ceil(n))


def _occupied_bins(ps: ParticleSet, params: KldParams) -> int:
    keys = np.stack([
        np.floor(ps.poses[:, 0] / params.bin_xy),
        np.floor(ps.poses[:, 1] / params.bin_xy),
        np.floor(ps.poses[:, 2] / params.bin_yaw),
    ], axis=-1).astype(np.int64)
    keys = keys[ps.weights > 0]
    return len(np.unique(keys, axis=0))


def low_variance_resample(poses: np.ndarray, weights: np.ndarray, m: int,
                          rng: np.random.Generator) -> np.ndarray:
    """Systematic resampling: offspring counts are floor(m*w) or ceil(m*w)."""
    positions = (rng.uniform(0.0, 1.0 / m) + np.arange(m) / m)
    cum = np.cumsum(weights)
    cum[-1] = 1.0
    idx = np.searchsorted(cum, positions, side="left")
    return poses[idx].copy()


def resample_adaptive(ps: ParticleSet, kld_params: KldParams = KldParams(),
                      rng: np.random.Generator | None = None) -> ParticleSet:
    """ESS-gated low-variance resampling with a KLD-adaptive particle count."""
    if rng is None:
        rng = np.random.default_rng(0)
    ess = 1.0 / float(np.sum(ps.weights**2))
    if ess >= len(ps) / 2.0:
        return ps
    k = _occupied_bins(ps, kld_params)
    m = min(max(kld_sample_count(k, kld_params), ps.n_min), ps.n_max)
    poses = low_variance_resample(ps.poses, ps.weights, m, rng)
    return replace(ps, poses=poses, weights=np.full(m, 1.0 / m))


def estimate(ps: ParticleSet) -> tuple[Pose2, np.ndarray, bool]:
    """Weighted mean pose (circular yaw), 3x3 covariance, convergence flag."""
    if len(ps) == 0:
        raise ValueError("empty particle set")
    w = ps.weights / ps.weights.sum()
    mx = float(w @ ps.poses[:, 0])
    my = float(w @ ps.poses[:, 1])
    sin_sum = float(w @ np.sin(ps.poses[:, 2]))
    cos_sum = float(w @ np.cos(ps.poses[:, 2]))
    myaw = math.atan2(sin_sum, cos_sum)

    dev = np.empty_like(ps.poses)
    dev[:, 0] = ps.poses[:, 0] - mx
    dev[:, 1] = ps.poses[:, 1] - my
    dev[:, 2] = _normalize_angles(ps.poses[:, 2] - myaw)
    cov = (dev * w[:, None]).T @ dev
    cov = 0.5 * (cov + cov.T)

    pos_eigs = np.linalg.eigvalsh(cov[:2, :2])
    converged = (math.sqrt(max(pos_eigs[-1], 0.0)) <= 0.05
                 and math.sqrt(max(cov[2, 2], 0.0)) <= 0.0873)
    return Pose2(mx, my, normalize_angle(myaw)), cov, converged
