import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dispersim.errors import IonizationError
from dispersim.interaction import InteractionContext, ionization_guard, radius, tau_x, tau_y
from dispersim.orbit import NPP_ORBIT, Orbit
from dispersim.physics import CONSTANTS, photon_energy

EV = CONSTANTS.eV
angles = st.floats(min_value=0, max_value=2 * math.pi)


def ctx_at(energy_ev=1.96, orbit=NPP_ORBIT, offset=0.0):
    return InteractionContext(orbit=orbit, photon_energy=energy_ev * EV, frame_offset=offset)


def test_radius_landmarks():
    u, e = NPP_ORBIT.semimajor, NPP_ORBIT.eccentricity
    assert radius(0.0, NPP_ORBIT) == pytest.approx(u * (1 - e), rel=1e-15)
    assert radius(math.pi, NPP_ORBIT) == pytest.approx(u * (1 + e), rel=1e-15)
    assert radius(math.pi / 2, NPP_ORBIT) == pytest.approx(1.30536e-10, rel=1e-12)


@given(angles)
def test_radius_bounds(theta):
    u, e = NPP_ORBIT.semimajor, NPP_ORBIT.eccentricity
    r = radius(theta, NPP_ORBIT)
    assert u * (1 - e) * (1 - 1e-14) <= r <= u * (1 + e) * (1 + 1e-14)


def test_tau_x_at_perigee():
    # sqrt(2 h nu m_e) (u (1 - e))² / (k_C Z e²) at h nu = 1.96 eV, 30-digit evaluation
    assert tau_x(0.0, ctx_at()) == pytest.approx(9.022677580553352e-18, rel=1e-12)


def test_tau_zeros_and_symmetry():
    ctx = ctx_at()
    assert tau_x(math.pi / 2, ctx) == pytest.approx(0.0, abs=1e-33)
    assert tau_y(0.0, ctx) == 0.0
    assert tau_x(math.pi / 4, ctx) == pytest.approx(tau_y(math.pi / 4, ctx), rel=1e-14)
    shifted = ctx_at(offset=0.3)
    assert tau_x(math.pi / 2 - 0.3, shifted) == pytest.approx(0.0, abs=1e-33)


@given(angles)
def test_tau_pythagorean(theta):
    ctx = ctx_at()
    full = ctx.prefactor * radius(theta, NPP_ORBIT) ** 2
    assert tau_x(theta, ctx) >= 0 and tau_y(theta, ctx) >= 0
    assert math.hypot(tau_x(theta, ctx), tau_y(theta, ctx)) == pytest.approx(full, rel=1e-13)


@given(angles)
def test_tau_scaling_laws(theta):
    base = tau_x(theta, ctx_at())
    double_z = Orbit(NPP_ORBIT.eccentricity, NPP_ORBIT.semimajor, 2 * NPP_ORBIT.charge)
    double_u = Orbit(NPP_ORBIT.eccentricity, 2 * NPP_ORBIT.semimajor, NPP_ORBIT.charge)
    assert tau_x(theta, ctx_at(orbit=double_z)) == pytest.approx(base / 2, rel=1e-13, abs=1e-40)
    assert tau_x(theta, ctx_at(orbit=double_u)) == pytest.approx(4 * base, rel=1e-13, abs=1e-40)
    assert tau_x(theta, ctx_at(energy_ev=4 * 0.98)) == pytest.approx(2 * tau_x(theta, ctx_at(0.98)), rel=1e-13, abs=1e-40)


def test_circular_orbit_has_equal_mean_delays():
    circle = Orbit(0.0, 1.4e-10, 3.9)
    theta = np.linspace(0, 2 * math.pi, 400_001)[:-1]
    ctx = ctx_at(orbit=circle)
    assert np.mean(tau_x(theta, ctx)) == pytest.approx(np.mean(tau_y(theta, ctx)), rel=1e-9)


def test_ionization_guard():
    assert ionization_guard(1.96 * EV)
    assert not ionization_guard(5.0 * EV)
    assert ionization_guard(photon_energy(1340e-9))
    assert photon_energy(1340e-9) / EV == pytest.approx(0.93, abs=0.01)
    with pytest.raises(IonizationError):
        ctx_at(energy_ev=5.0)
