"""Hand-rolled SVG rendering of a trajectory over the map raster."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..core.grid import OccupancyGrid

_SCALE = 200.0  # svg px per meter


def _cell_rects(grid: OccupancyGrid) -> list[str]:
    rects = []
    res = grid.resolution
    occupied = grid.occupied_mask()
    unknown = ~grid.observed
    h_px = grid.height * res * _SCALE
    for mask, color in ((unknown, "#c8c8c8"), (occupied, "#202020")):
        for iy, ix in np.argwhere(mask):
            x = grid.origin.x + ix * res
            y = grid.origin.y + iy * res
            rects.append(
                f'<rect x="{x * _SCALE:.1f}" y="{h_px - (y + res) * _SCALE:.1f}" '
                f'width="{res * _SCALE:.1f}" height="{res * _SCALE:.1f}" fill="{color}"/>'
            )
    return rects


def read_trajectory_csv(path: str | Path) -> np.ndarray:
    """Read stamp, x, y columns from any of the harness CSV logs."""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or not {"x", "y"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: log has no x/y columns")
        rows = [(float(r.get("stamp", 0.0)), float(r["x"]), float(r["y"])) for r in reader]
    if not rows:
        raise ValueError(f"{path}: log is empty")
    return np.asarray(rows)


def render_svg(trajectory: np.ndarray, grid: OccupancyGrid | None,
               out_path: str | Path) -> Path:
    """Trajectory polyline (and optional map raster) as a standalone SVG."""
    traj = np.asarray(trajectory, dtype=np.float64)
    if grid is not None:
        w_px = grid.width * grid.resolution * _SCALE
        h_px = grid.height * grid.resolution * _SCALE
    else:
        margin = 0.2
        w_px = (traj[:, 1].max() - min(traj[:, 1].min(), 0.0) + margin) * _SCALE
        h_px = (traj[:, 2].max() - min(traj[:, 2].min(), 0.0) + margin) * _SCALE

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w_px:.0f}" height="{h_px:.0f}" '
        f'viewBox="0 0 {w_px:.0f} {h_px:.0f}">',
        f'<rect width="{w_px:.0f}" height="{h_px:.0f}" fill="#ffffff"/>',
    ]
    if grid is not None:
        parts.extend(_cell_rects(grid))
    pts = " ".join(f"{x * _SCALE:.1f},{h_px - y * _SCALE:.1f}" for _, x, y in traj)
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#d62728" stroke-width="2"/>')
    sx, sy = traj[0, 1] * _SCALE, h_px - traj[0, 2] * _SCALE
    gx, gy = traj[-1, 1] * _SCALE, h_px - traj[-1, 2] * _SCALE
    parts.append(f'<circle cx="{sx:.1f}" cy="{sy:.1f}" r="4" fill="#2ca02c"/>')
    parts.append(f'<circle cx="{gx:.1f}" cy="{gy:.1f}" r="4" fill="#1f77b4"/>')
    parts.append("</svg>")

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(parts) + "\n")
    return out_path
