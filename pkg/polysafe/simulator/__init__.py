from .closed_loop import (
    IntegrationError,
    OutsideEnvironmentError,
    SimulationTimeoutError,
    held_reference_state,
    run,
    sample_initial_states,
    step,
)
from .config import SimConfig
from .log import SwitchEvent, TrajectoryLog, safety_margin

__all__ = [
    "IntegrationError",
    "OutsideEnvironmentError",
    "SimConfig",
    "SimulationTimeoutError",
    "SwitchEvent",
    "TrajectoryLog",
    "held_reference_state",
    "run",
    "safety_margin",
    "sample_initial_states",
    "step",
]
