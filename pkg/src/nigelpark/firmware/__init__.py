from .types import FirmwareConfig, FirmwareState, FirmwareOutputs
from .controller import velocity_controller_step, steering_controller_step, run_firmware_cycle
from .stages import (
    SetpointProfile,
    golden_profile,
    run_stage,
    stage_equivalence,
    write_trace,
    read_trace,
    write_equivalence_report,
    STEERING_TOLERANCE,
    WHEEL_RATE_TOLERANCE,
)

__all__ = [
    "FirmwareConfig",
    "FirmwareState",
    "FirmwareOutputs",
    "velocity_controller_step",
    "steering_controller_step",
    "run_firmware_cycle",
    "SetpointProfile",
    "golden_profile",
    "run_stage",
    "stage_equivalence",
    "write_trace",
    "read_trace",
    "write_equivalence_report",
    "STEERING_TOLERANCE",
    "WHEEL_RATE_TOLERANCE",
]
