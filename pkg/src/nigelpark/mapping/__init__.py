from .map_io import MapFormatError, load_map, save_map, OCCUPIED_THRESH, FREE_THRESH
from .slam import InverseSensorModel, SlamState, integrate_scan, match_scan_to_map, slam_step, logit

__all__ = [
    "MapFormatError",
    "load_map",
    "save_map",
    "OCCUPIED_THRESH",
    "FREE_THRESH",
    "InverseSensorModel",
    "SlamState",
    "integrate_scan",
    "match_scan_to_map",
    "slam_step",
    "logit",
]
