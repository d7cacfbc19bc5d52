"""Monte Carlo escape times from a cubic well under stochastic resetting."""

from . import _backend
from .dynamics import NumericalBlowupError, SimParams, State, drift, gaussian_increment, step
from .engine import (
    CensoredSamplesError,
    ComebackReport,
    FptSamples,
    TrajectoryOutcome,
    run_ensemble,
    run_trajectory,
    validate_no_comeback,
)
from .potential import InvalidSpecError, PotentialSpec, evaluate, gradient, landmarks, total_energy
from .resetting import (
    Deterministic,
    NoReset,
    Poisson,
    ResetPoint,
    apply_reset,
    next_reset_time,
    parse_schedule,
)
from .rng import RngStream

__version__ = "0.1.0"

BACKEND = _backend.default_name()

__all__ = [
    "BACKEND",
    "CensoredSamplesError",
    "ComebackReport",
    "Deterministic",
    "FptSamples",
    "InvalidSpecError",
    "NoReset",
    "NumericalBlowupError",
    "Poisson",
    "PotentialSpec",
    "ResetPoint",
    "RngStream",
    "SimParams",
    "State",
    "TrajectoryOutcome",
    "apply_reset",
    "drift",
    "evaluate",
    "gaussian_increment",
    "gradient",
    "landmarks",
    "next_reset_time",
    "parse_schedule",
    "run_ensemble",
    "run_trajectory",
    "step",
    "total_energy",
    "validate_no_comeback",
]
