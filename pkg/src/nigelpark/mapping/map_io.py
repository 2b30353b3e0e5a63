"""Bit-exact PGM (binary P5) + YAML sidecar map files.

Pixel encoding with negate=0: occupied=0, free=254, unknown=205.  Row 0 of
the image is the top (north) of the map; the sidecar origin is the world
pose of the lower-left map corner, i.e. the corner of cell (0, 0).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import yaml

from ..core.geometry import Pose2
from ..core.grid import L_MAX, L_MIN, OccupancyGrid

OCCUPIED_THRESH = 0.65
FREE_THRESH = 0.196

_PIXEL_OCCUPIED = 0
_PIXEL_FREE = 254
_PIXEL_UNKNOWN = 205

_REQUIRED_KEYS = ("image", "resolution", "origin", "negate", "occupied_thresh", "free_thresh")


class MapFormatError(ValueError):
    """Raised on malformed map files; the message names the offending field."""


def save_map(grid: OccupancyGrid, prefix: str | Path) -> tuple[Path, Path]:
    """Write <prefix>.pgm and <prefix>.yaml; returns both paths."""
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    pgm_path = prefix.with_suffix(".pgm")
    yaml_path = prefix.with_suffix(".yaml")

    pixels = np.full((grid.height, grid.width), _PIXEL_UNKNOWN, dtype=np.uint8)
    pixels[grid.occupied_mask(OCCUPIED_THRESH)] = _PIXEL_OCCUPIED
    pixels[grid.free_mask(FREE_THRESH)] = _PIXEL_FREE
    pixels = pixels[::-1, :]  # row 0 = top of map

    with open(pgm_path, "wb") as f:
        f.write(f"P5\n{grid.width} {grid.height}\n255\n".encode("ascii"))
        f.write(pixels.tobytes())

    origin = grid.origin
    with open(yaml_path, "w") as f:
        f.write(f"image: {pgm_path.name}\n")
        f.write(f"resolution: {grid.resolution!r}\n")
        f.write(f"origin: [{origin.x!r}, {origin.y!r}, {origin.yaw!r}]\n")
        f.write("negate: 0\n")
        f.write(f"occupied_thresh: {OCCUPIED_THRESH!r}\n")
        f.write(f"free_thresh: {FREE_THRESH!r}\n")
    return pgm_path, yaml_path


def _read_pgm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    tokens: list[bytes] = []
    i = 0
    while len(tokens) < 4 and i < len(data):
        if data[i : i + 1].isspace():
            i += 1
            continue
        if data[i : i + 1] == b"#":
            while i < len(data) and data[i : i + 1] != b"\n":
                i += 1
            continue
        j = i
        while j < len(data) and not data[j : j + 1].isspace():
            j += 1
        tokens.append(data[i:j])
        i = j
    if len(tokens) < 4 or tokens[0] != b"P5":
        raise MapFormatError(f"{path}: malformed PGM header (expected binary P5)")
    try:
        width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    except ValueError as exc:
        raise MapFormatError(f"{path}: malformed PGM header: non-integer size field") from exc
    if maxval != 255:
        raise MapFormatError(f"{path}: unsupported PGM maxval {maxval} (field maxval)")
    raster = data[i + 1 :]
    if len(raster) != width * height:
        raise MapFormatError(
            f"{path}: PGM size mismatch: header {width}x{height} but {len(raster)} data bytes"
        )
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width)


def load_map(path: str | Path) -> OccupancyGrid:
    """Load a PGM+YAML map pair; ``path`` is the prefix or the .yaml path."""
    path = Path(path)
    yaml_path = path if path.suffix == ".yaml" else path.with_suffix(".yaml")
    if not yaml_path.exists():
        raise MapFormatError(f"map sidecar not found: {yaml_path}")
    with open(yaml_path) as f:
        meta = yaml.safe_load(f)
    if not isinstance(meta, dict):
        raise MapFormatError(f"{yaml_path}: sidecar must be a mapping")
    unknown = set(meta) - set(_REQUIRED_KEYS)
    if unknown:
        raise MapFormatError(f"{yaml_path}: unknown YAML key {sorted(unknown)[0]!r}")
    for key in _REQUIRED_KEYS:
        if key not in meta:
            raise MapFormatError(f"{yaml_path}: missing YAML key {key!r}")
    if int(meta["negate"]) != 0:
        raise MapFormatError(f"{yaml_path}: unsupported value for field 'negate'")

    pixels = _read_pgm(yaml_path.parent / str(meta["image"]))
    pixels = pixels[::-1, :]  # back to row 0 = south

    resolution = float(meta["resolution"])
    ox, oy, oyaw = (float(v) for v in meta["origin"])
    occupied_thresh = float(meta["occupied_thresh"])
    free_thresh = float(meta["free_thresh"])

    shade = (255.0 - pixels.astype(np.float64)) / 255.0
    occupied = shade > occupied_thresh
    free = shade < free_thresh

    height, width = pixels.shape
    grid = OccupancyGrid.empty(width, height, resolution, Pose2(ox, oy, oyaw))
    grid.log_odds[occupied] = L_MAX
    grid.log_odds[free] = L_MIN
    grid.observed[occupied | free] = True
    return grid
