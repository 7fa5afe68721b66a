"""Physical constants and photon/beam bookkeeping.

Everything internal is SI. Conversions to nm, Å, eV and per-cm² quantities
happen only at the edges (CLI, published-value comparisons) through the
helpers defined here.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from dispersim.errors import DomainError

NM = 1e-9
ANGSTROM = 1e-10
MICRON = 1e-6
CM2 = 1e-4  # m² per cm²

# NPP transparency window (m)
TRANSPARENCY_WINDOW = (0.48e-6, 2.0e-6)


@dataclass(frozen=True)
class Constants:
    """CODATA 2018 values (h, e, c0 are exact in the 2019 SI)."""

    h: float = 6.62607015e-34
    m_e: float = 9.1093837015e-31
    q_e: float = 1.602176634e-19
    k_C: float = 8.9875517923e9
    c0: float = 299792458.0
    eV: float = 1.602176634e-19

    def __post_init__(self):
        for name in ("h", "m_e", "q_e", "k_C", "c0", "eV"):
            if not getattr(self, name) > 0:
                raise ValueError(f"constant {name} must be positive")


CONSTANTS = Constants()


def in_transparency_window(wavelength: float) -> bool:
    lo, hi = TRANSPARENCY_WINDOW
    return lo <= wavelength <= hi


@dataclass(frozen=True)
class Beam:
    """Monochromatic beam: vacuum wavelength (m), average power (W), diameter (m).

    The beam is treated as a circular top-hat of diameter ``beamwidth``.
    """

    wavelength: float
    power: float
    beamwidth: float

    def __post_init__(self):
        if not self.wavelength > 0:
            raise DomainError(f"wavelength must be positive, got {self.wavelength!r}")
        if not self.power >= 0:
            raise DomainError(f"power must be non-negative, got {self.power!r}")
        if not self.beamwidth > 0:
            raise DomainError(f"beamwidth must be positive, got {self.beamwidth!r}")
        if not in_transparency_window(self.wavelength):
            warnings.warn(
                f"wavelength {self.wavelength / NM:.1f} nm lies outside the NPP "
                "transparency window (480-2000 nm)",
                stacklevel=2,
            )

    @property
    def outside_transparency(self) -> bool:
        return not in_transparency_window(self.wavelength)


def photon_energy(wavelength, constants: Constants = CONSTANTS):
    """Photon energy h*c0/lambda in joules. Accepts scalars or arrays."""
    lam = np.asarray(wavelength, dtype=float)
    if np.any(~(lam > 0)):
        raise DomainError("wavelength must be positive")
    energy = constants.h * constants.c0 / lam
    return float(energy) if energy.ndim == 0 else energy


def photon_energy_ev(wavelength, constants: Constants = CONSTANTS):
    return photon_energy(wavelength, constants) / constants.eV


def beam_intensity(beam: Beam) -> float:
    """Average intensity in W/cm² for a top-hat beam of diameter ``beam.beamwidth``."""
    area_cm2 = math.pi * (beam.beamwidth / 2) ** 2 / CM2
    return beam.power / area_cm2


def photon_flux(intensity: float, wavelength: float, constants: Constants = CONSTANTS) -> float:
    """Photon flux in photons/(s·cm²) for an intensity given in W/cm²."""
    if intensity < 0:
        raise DomainError(f"intensity must be non-negative, got {intensity!r}")
    return intensity / photon_energy(wavelength, constants)


def per_molecule_interaction_period(flux: float, molecule_area: float) -> float:
    """Mean time (s) between photon arrivals on one molecule's cross-section.

    ``flux`` is in photons/(s·cm²), ``molecule_area`` in m².
    """
    if not molecule_area > 0:
        raise DomainError(f"molecule_area must be positive, got {molecule_area!r}")
    if not flux > 0:
        raise DomainError("zero photon flux: interaction period is infinite")
    return 1.0 / (flux * molecule_area / CM2)
