"""Incremental planar ego-motion: wheel+IMU dead reckoning as the prior and
point-to-line scan alignment as the refined estimate with fallback."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .core.geometry import Pose2, compose
from .core.scan import LaserScan


@dataclass(frozen=True)
class OdometryParams:
    wheel_radius: float = 0.03
    ticks_per_rad: float = 2048 / (2.0 * math.pi)
    # proportional dead-reckoning noise model
    sigma_ds_rel: float = 0.02
    sigma_ds_floor: float = 1e-4
    sigma_dyaw_rel: float = 0.05
    sigma_dyaw_floor: float = 1e-4
    # scan alignment
    gate: float = 0.2
    huber_delta: float = 0.05
    max_iterations: int = 30
    convergence: float = 1e-5
    min_match_fraction: float = 0.4


@dataclass(frozen=True)
class OdometryDelta:
    """Motion in the previous body frame with a 3x3 covariance."""

    delta: Pose2
    cov: np.ndarray = field(repr=False)
    method: str = "dead_reckoned"   # "matched" | "dead_reckoned"

    def __post_init__(self) -> None:
        cov = np.asarray(self.cov, dtype=np.float64)
        if cov.shape != (3, 3):
            raise ValueError("cov must be 3x3")
        if not np.allclose(cov, cov.T, atol=1e-12):
            raise ValueError("cov must be symmetric")
        if np.any(np.linalg.eigvalsh(cov) < -1e-12):
            raise ValueError("cov must be positive semidefinite")
        object.__setattr__(self, "cov", cov)


def dead_reckon(encoder_dticks: int, imu_yaw_rate: float, dt: float,
                params: OdometryParams = OdometryParams()) -> OdometryDelta:
    """Midpoint-arc dead reckoning from encoder ticks and gyro yaw rate."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    ds = encoder_dticks / params.ticks_per_rad * params.wheel_radius
    dyaw = imu_yaw_rate * dt
    delta = Pose2(ds * math.cos(dyaw / 2.0), ds * math.sin(dyaw / 2.0), dyaw)
    sigma_ds = params.sigma_ds_rel * abs(ds) + params.sigma_ds_floor
    sigma_dyaw = params.sigma_dyaw_rel * abs(dyaw) + params.sigma_dyaw_floor
    cov = np.diag([sigma_ds**2, sigma_ds**2, sigma_dyaw**2])
    return OdometryDelta(delta=delta, cov=cov, method="dead_reckoned")


def _scan_points(scan: LaserScan) -> np.ndarray:
    mask = scan.hit_mask()
    a = scan.angles()[mask]
    r = scan.ranges[mask]
    return np.stack([r * np.cos(a), r * np.sin(a)], axis=-1)


def _polyline_segments(points: np.ndarray, max_gap: float) -> tuple[np.ndarray, np.ndarray]:
    """Segments between consecutive scan endpoints, split at range jumps."""
    if len(points) < 2:
        return np.empty((0, 2)), np.empty((0, 2))
    a = points[:-1]
    b = points[1:]
    keep = np.linalg.norm(b - a, axis=1) <= max_gap
    return a[keep], b[keep]


def align_scans(prev: LaserScan, curr: LaserScan, guess: Pose2,
                params: OdometryParams = OdometryParams()) -> OdometryDelta:
    """Iterative point-to-line alignment of curr onto prev's endpoint polyline.

    Falls back to the dead-reckoned guess when fewer than
    ``min_match_fraction`` of the beams associate at convergence.
    """
    ref = _scan_points(prev)
    src = _scan_points(curr)
    if len(ref) < 2 or len(src) < 3:
        return _fallback(guess, params)

    seg_a, seg_b = _polyline_segments(ref, max_gap=4.0 * params.gate)
    if len(seg_a) == 0:
        return _fallback(guess, params)
    seg_mid = 0.5 * (seg_a + seg_b)
    seg_dir = seg_b - seg_a
    seg_len = np.linalg.norm(seg_dir, axis=1)
    ok = seg_len > 1e-9
    seg_a, seg_b, seg_mid, seg_dir, seg_len = (
        seg_a[ok], seg_b[ok], seg_mid[ok], seg_dir[ok], seg_len[ok])
    if len(seg_a) == 0:
        return _fallback(guess, params)
    normals = np.stack([-seg_dir[:, 1], seg_dir[:, 0]], axis=-1) / seg_len[:, None]
    tree = cKDTree(seg_mid)

    tx, ty, yaw = guess.x, guess.y, guess.yaw
    matched_fraction = 0.0
    converged = False
    info = np.eye(3)
    for _ in range(params.max_iterations):
        c, s = math.cos(yaw), math.sin(yaw)
        px = tx + c * src[:, 0] - s * src[:, 1]
        py = ty + s * src[:, 0] + c * src[:, 1]
        proj = np.stack([px, py], axis=-1)

        dist, idx = tree.query(proj)
        use = dist <= params.gate
        matched_fraction = float(use.mean())
        if use.sum() < 10:
            break
        n = normals[idx[use]]
        q = seg_a[idx[use]]
        p = proj[use]
        r = np.einsum("ij,ij->i", n, p - q)

        w = np.ones(len(r))
        big = np.abs(r) > params.huber_delta
        w[big] = params.huber_delta / np.abs(r[big])

        body = src[use]
        dpx = -body[:, 0] * s - body[:, 1] * c
        dpy = body[:, 0] * c - body[:, 1] * s
        jac = np.stack([n[:, 0], n[:, 1], n[:, 0] * dpx + n[:, 1] * dpy], axis=-1)

        jw = jac * w[:, None]
        hess = jw.T @ jac
        rhs = jw.T @ r
        eigs = np.linalg.eigvalsh(hess)
        if eigs[0] <= 1e-12 * max(eigs[-1], 1e-30):
            break
        step = np.linalg.solve(hess, rhs)
        tx -= step[0]
        ty -= step[1]
        yaw -= step[2]
        info = hess
        if np.linalg.norm(step) < params.convergence:
            converged = True
            break

    if not converged or matched_fraction < params.min_match_fraction:
        return _fallback(guess, params)

    cov = np.linalg.inv(info + 1e-9 * np.eye(3))
    cov = 0.5 * (cov + cov.T)
    cov += np.diag([1e-8, 1e-8, 1e-8])
    return OdometryDelta(delta=Pose2(tx, ty, yaw), cov=cov, method="matched")


def _fallback(guess: Pose2, params: OdometryParams) -> OdometryDelta:
    ds = math.hypot(guess.x, guess.y)
    sigma_ds = params.sigma_ds_rel * ds + params.sigma_ds_floor
    sigma_dyaw = params.sigma_dyaw_rel * abs(guess.yaw) + params.sigma_dyaw_floor
    cov = np.diag([sigma_ds**2, sigma_ds**2, sigma_dyaw**2])
    return OdometryDelta(delta=guess, cov=cov, method="dead_reckoned")


def accumulate(pose: Pose2, d: OdometryDelta) -> Pose2:
    """Chain a delta onto a pose (result yaw normalized)."""
    return compose(pose, d.delta)
