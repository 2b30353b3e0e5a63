#!/usr/bin/env python3
"""Regenerate the shipped ground-truth world maps (worlds/maps/*).

The map raster is derived from the rectangle list below; run this after
changing the layout and commit the regenerated PGM/YAML pair.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from nigelpark.core.geometry import Pose2                    # noqa: E402
from nigelpark.core.grid import L_MAX, L_MIN, OccupancyGrid  # noqa: E402
from nigelpark.mapping.map_io import save_map                # noqa: E402

RESOLUTION = 0.05
WIDTH, HEIGHT = 60, 48          # 3.0 m x 2.4 m

# Occupied rectangles (x0, y0, x1, y1) in meters: perimeter walls, the
# reverse-perpendicular bay stubs on the south wall, and two U-shaped slot
# dividers framing the parallel slot on the north wall.  All structures are
# one cell thick so every occupied cell is observable from the drivable area.
WALLS = [
    (0.00, 0.00, 3.00, 0.05),
    (0.00, 2.35, 3.00, 2.40),
    (0.00, 0.00, 0.05, 2.40),
    (2.95, 0.00, 3.00, 2.40),
    (1.15, 0.05, 1.20, 0.60),
    (1.80, 0.05, 1.85, 0.60),
    # west divider: west flank, south lip, east flank
    (0.50, 2.05, 0.55, 2.35),
    (0.50, 2.05, 0.80, 2.10),
    (0.75, 2.05, 0.80, 2.35),
    # east divider
    (1.60, 2.05, 1.65, 2.35),
    (1.60, 2.05, 1.90, 2.10),
    (1.85, 2.05, 1.90, 2.35),
]


def build_carpark() -> OccupancyGrid:
    grid = OccupancyGrid.empty(WIDTH, HEIGHT, RESOLUTION, Pose2(0.0, 0.0, 0.0))
    grid.log_odds[:] = L_MIN
    grid.observed[:] = True
    for x0, y0, x1, y1 in WALLS:
        ix0 = int(round(x0 / RESOLUTION))
        ix1 = int(round(x1 / RESOLUTION))
        iy0 = int(round(y0 / RESOLUTION))
        iy1 = int(round(y1 / RESOLUTION))
        grid.log_odds[iy0:iy1, ix0:ix1] = L_MAX
    return grid


def main() -> None:
    out = REPO / "worlds" / "maps"
    paths = save_map(build_carpark(), out / "carpark")
    for p in paths:
        print(f"wrote {p}")


if __name__ == "__main__":
    main()
