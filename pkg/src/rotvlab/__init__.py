"""Simulation and control laboratory for a remotely operated towed vehicle."""

from .config import Config, load_config
from .controllers import (LqrControllerState, PidControllerState, PidGains, lqr_step, pid_step)
from .envsim import CSV_COLUMNS, Scenario, Trajectory, simulate
from .errors import RotvError
from .kernels import BACKEND
from .lincontrol import (GainSchedule, LQRWeights, build_gain_schedule, linearize, lqr_gain,
                         solve_care)
from .model import (AddedMassCoeffs, BodyState, FinDeflections, VehicleModel,
                    compute_added_mass_coefficients, state_derivative)
from .params import ServoParams, VehicleParams

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CSV_COLUMNS", "AddedMassCoeffs", "BodyState", "Config", "FinDeflections",
    "GainSchedule", "LQRWeights", "LqrControllerState", "PidControllerState", "PidGains",
    "RotvError", "Scenario", "ServoParams", "Trajectory", "VehicleModel", "VehicleParams",
    "build_gain_schedule", "compute_added_mass_coefficients", "linearize", "load_config",
    "lqr_gain", "lqr_step", "pid_step", "simulate", "solve_care", "state_derivative",
]
