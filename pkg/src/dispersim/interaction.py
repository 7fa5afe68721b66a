"""Delay accrued when one photon is absorbed and re-emitted by the orbit electron.

The absorbed photon gives the electron kinetic energy h*nu along the field
direction. The Coulomb pull of the virtual centre (charge Z*e at the focus)
decelerates it, and the excursion lasts

    tau = sqrt(2 h nu m_e) * |proj(theta + theta0)| * r(theta)**2 / (k_C Z e**2)

with proj = cos for the x-polarised component and sin for y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dispersim.errors import IonizationError
from dispersim.orbit import Orbit
from dispersim.physics import CONSTANTS, Constants

IONIZATION_THRESHOLD_EV = 5.0


def ionization_guard(photon_energy: float, constants: Constants = CONSTANTS) -> bool:
    """True while the photon energy (J) stays below the 5 eV ionization threshold."""
    if not photon_energy > 0:
        raise ValueError("photon energy must be positive")
    return photon_energy < IONIZATION_THRESHOLD_EV * constants.eV


@dataclass(frozen=True)
class InteractionContext:
    orbit: Orbit
    photon_energy: float  # J
    frame_offset: float = 0.0  # rad
    constants: Constants = CONSTANTS

    def __post_init__(self):
        if not ionization_guard(self.photon_energy, self.constants):
            ev = self.photon_energy / self.constants.eV
            raise IonizationError(
                f"photon energy {ev:.3f} eV is not below the {IONIZATION_THRESHOLD_EV} eV "
                "ionization threshold; the bound-electron model does not apply"
            )

    @property
    def prefactor(self) -> float:
        """sqrt(2 h nu m_e) / (k_C Z e²), in s/m²."""
        k = self.constants
        return math.sqrt(2 * self.photon_energy * k.m_e) / (k.k_C * self.orbit.charge * k.q_e**2)


def radius(theta, orbit: Orbit):
    """Focal radius (1 - e²) u / (1 + e cos theta)."""
    ecc = orbit.eccentricity
    r = (1 - ecc**2) * orbit.semimajor / (1 + ecc * np.cos(theta))
    return float(r) if np.ndim(r) == 0 else r


def tau_x(theta, ctx: InteractionContext):
    r = radius(theta, ctx.orbit)
    return ctx.prefactor * np.abs(np.cos(np.add(theta, ctx.frame_offset))) * r**2


def tau_y(theta, ctx: InteractionContext):
    r = radius(theta, ctx.orbit)
    return ctx.prefactor * np.abs(np.sin(np.add(theta, ctx.frame_offset))) * r**2


def tau(theta, ctx: InteractionContext, axis: str):
    if axis == "x":
        return tau_x(theta, ctx)
    if axis == "y":
        return tau_y(theta, ctx)
    raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
