"""Photon-delay Monte-Carlo model of normal dispersion in NPP crystal films."""

__version__ = "0.1.0"

from dispersim.errors import (
    CalibrationError,
    ConvergenceError,
    DomainError,
    IonizationError,
)
from dispersim.physics import CONSTANTS, Beam, photon_energy
from dispersim.crystal import NPP_CELL, CrystalFilm, UnitCell
from dispersim.orbit import Orbit, NPP_ORBIT
from dispersim.engine import SimulationConfig, simulate_dispersion

__all__ = [
    "__version__",
    "CalibrationError",
    "ConvergenceError",
    "DomainError",
    "IonizationError",
    "CONSTANTS",
    "Beam",
    "photon_energy",
    "NPP_CELL",
    "CrystalFilm",
    "UnitCell",
    "Orbit",
    "NPP_ORBIT",
    "SimulationConfig",
    "simulate_dispersion",
]
