"""Steady-state simulator for two-spin dynamic nuclear polarization."""

from .engine import Liouvillian, TermFlags, assemble, kernel_weight
from .model import SpinParams, reference_params, thermal_state
from .steady import Observables, SteadyState, observables, solve_steady_state

__version__ = "0.1.0"

__all__ = [
    "Liouvillian",
    "Observables",
    "SpinParams",
    "SteadyState",
    "TermFlags",
    "assemble",
    "kernel_weight",
    "observables",
    "reference_params",
    "solve_steady_state",
    "thermal_state",
]
