"""Boundary-driven harmonic-oscillator chains under local Lindblad master equations."""

__version__ = "0.1.0"

from .model import ChainSpec, bose_einstein, linear_profile
from .gaussian import CovarianceState, mode_moments, steady_state
from .thermo import Rates, Regime, ThermoReport, classify, steady_report

__all__ = [
    "ChainSpec",
    "CovarianceState",
    "Rates",
    "Regime",
    "ThermoReport",
    "bose_einstein",
    "classify",
    "linear_profile",
    "mode_moments",
    "steady_report",
    "steady_state",
    "__version__",
]
