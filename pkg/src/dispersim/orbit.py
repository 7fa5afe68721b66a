"""Elliptical pi-electron orbit under Kepler's second law.

The electron circles a virtual positive charge sitting at one focus. The
angle theta is measured from perigee (prolinol side, theta = 0) towards
apogee (nitro side, theta = pi), so the electron lingers near the nitro
group and the presence density peaks there.

The time law is evaluated through the eccentric anomaly, which is the same
function as the textbook arctan/tan half-angle expression but continuous
over the full turn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from dispersim.errors import ConvergenceError, DomainError
from dispersim.physics import ANGSTROM

TWO_PI = 2.0 * math.pi
KEPLER_TOL = 1e-12
KEPLER_MAX_ITER = 100


@dataclass(frozen=True)
class Orbit:
    eccentricity: float
    semimajor: float  # m
    charge: float  # effective Z of the virtual centre, units of e
    period: float = 1.0  # s; pure normalisation

    def __post_init__(self):
        if not 0 <= self.eccentricity < 1:
            raise DomainError(f"eccentricity must lie in [0, 1), got {self.eccentricity!r}")
        if not self.semimajor > 0:
            raise DomainError("semimajor axis must be positive")
        if not self.charge > 0:
            raise DomainError("effective charge must be positive")
        if not self.period > 0:
            raise DomainError("period must be positive")


NPP_ORBIT = Orbit(eccentricity=0.26, semimajor=1.4 * ANGSTROM, charge=3.9)


def _check_theta(theta: np.ndarray) -> None:
    if np.any((theta < 0) | (theta > TWO_PI)) or np.any(np.isnan(theta)):
        raise DomainError("theta must lie in [0, 2*pi]")


def _scalar_or_array(x: np.ndarray):
    return float(x) if x.ndim == 0 else x


def _half_orbit_fraction(theta: np.ndarray, ecc: float) -> np.ndarray:
    # fraction of the period swept from perigee to theta, valid for theta in [0, pi]
    k = math.sqrt((1 - ecc) / (1 + ecc))
    E = 2.0 * np.arctan(k * np.tan(theta / 2.0))
    return (E - ecc * np.sin(E)) / TWO_PI


def kepler_time(theta, orbit: Orbit):
    """Time since perigee passage at true anomaly ``theta`` (radians, in [0, 2*pi]).

    Returns 0 at theta = 0, T/2 at pi and T at 2*pi; strictly increasing in
    between. Accepts scalars or arrays.
    """
    th = np.asarray(theta, dtype=float)
    _check_theta(th)
    ecc = orbit.eccentricity
    upper = th > math.pi
    mirrored = np.where(upper, TWO_PI - th, th)
    frac = _half_orbit_fraction(mirrored, ecc)
    frac = np.where(upper, 1.0 - frac, frac)
    return _scalar_or_array(orbit.period * frac)


def pdf(theta, eccentricity: float):
    """Presence density over the true anomaly, per radian.

    (1 - e²)^{3/2} / (2π (1 + e cos θ)²), which is (1/T)·dt/dθ of the time law.
    """
    if not 0 <= eccentricity < 1:
        raise DomainError("eccentricity must lie in [0, 1)")
    th = np.asarray(theta, dtype=float)
    dens = (1 - eccentricity**2) ** 1.5 / (TWO_PI * (1 + eccentricity * np.cos(th)) ** 2)
    return _scalar_or_array(dens)


def cdf(theta, orbit: Orbit | float):
    """Fraction of the period spent between perigee and ``theta``."""
    if not isinstance(orbit, Orbit):
        orbit = Orbit(eccentricity=float(orbit), semimajor=1.0, charge=1.0)
    return kepler_time(theta, orbit) / orbit.period


# Taylor coefficients of sin and cos through d**17 / d**18; truncation < 1e-22 for |d| < 0.5
_SIN_C = tuple((-1) ** k / math.factorial(2 * k + 1) for k in range(9))
_COS_C = tuple((-1) ** k / math.factorial(2 * k) for k in range(10))
_S0, _S1, _S2, _S3, _S4, _S5, _S6, _S7, _S8 = _SIN_C
_C0, _C1, _C2, _C3, _C4, _C5, _C6, _C7, _C8, _C9 = _COS_C


@njit(cache=True)
def _small_angle_trig(d):
    x = d * d
    if abs(d) < 2e-3:
        return d * (_S0 + x * (_S1 + x * _S2)), _C0 + x * (_C1 + x * (_C2 + x * _C3))
    sd = d * (_S0 + x * (_S1 + x * (_S2 + x * (_S3 + x * (_S4 + x * (_S5 + x * (_S6 + x * (_S7 + x * _S8))))))))
    cd = _C0 + x * (_C1 + x * (_C2 + x * (_C3 + x * (_C4 + x * (_C5 + x * (_C6 + x * (_C7 + x * (_C8 + x * _C9))))))))
    return sd, cd


@njit(cache=True)
def kepler_scalar(m, ecc, tol, max_iter):
    """Solve m = E - e sin E for one mean anomaly in [0, 2*pi].

    Returns (E, sin E, cos E, converged). sin E and cos E are carried along
    by angle addition, so a Newton step costs no transcendental calls once
    the step is small.
    """
    lo = 0.0
    hi = 2.0 * np.pi
    sm = np.sin(m)
    cm = np.cos(m)
    # second-order series start, reached from (sin M, cos M) by angle addition
    E = min(max(m + ecc * sm * (1.0 + ecc * cm), 0.0), 2.0 * np.pi)
    d = E - m
    if abs(d) < 0.5:
        sd, cd = _small_angle_trig(d)
        s, c = sm * cd + cm * sd, cm * cd - sm * sd
    else:
        s = np.sin(E)
        c = np.cos(E)
    for _ in range(max_iter + 1):
        f = E - ecc * s - m
        # half-tol margin absorbs the few-ulp drift of the carried sin/cos
        if abs(f) < 0.5 * tol:
            return E, s, c, True
        # f increases with E
        if f < 0:
            lo = E
        else:
            hi = E
        step = E - f / (1.0 - ecc * c)
        if step <= lo or step >= hi:
            step = 0.5 * (lo + hi)
        d = step - E
        if abs(d) < 0.5:
            sd, cd = _small_angle_trig(d)
            s, c = s * cd + c * sd, c * cd - s * sd
        else:
            s = np.sin(step)
            c = np.cos(step)
        E = step
    return E, s, c, False


@njit(cache=True)
def _kepler_kernel(M, ecc, tol, max_iter, E_out, sin_out, cos_out):
    failures = 0
    for i in range(M.size):
        E, s, c, ok = kepler_scalar(M[i], ecc, tol, max_iter)
        if not ok:
            failures += 1
        E_out[i] = E
        sin_out[i] = s
        cos_out[i] = c
    return failures


def solve_kepler(mean_anomaly, eccentricity: float, tol: float = KEPLER_TOL, max_iter: int = KEPLER_MAX_ITER):
    """Return (E, sin E, cos E) with |M - (E - e sin E)| < tol for every element."""
    M = np.asarray(mean_anomaly, dtype=float)
    ecc = float(eccentricity)
    if not 0 <= ecc < 1:
        raise DomainError("eccentricity must lie in [0, 1)")
    if np.any((M < 0) | (M > TWO_PI)) or np.any(np.isnan(M)):
        raise DomainError("mean anomaly must lie in [0, 2*pi]")
    flat = np.ascontiguousarray(M.reshape(-1))
    E, sE, cE = np.empty_like(flat), np.empty_like(flat), np.empty_like(flat)
    failures = _kepler_kernel(flat, ecc, tol, max_iter, E, sE, cE)
    if failures:
        raise ConvergenceError(f"Kepler solver failed to converge for {failures} element(s)")
    return E.reshape(M.shape), sE.reshape(M.shape), cE.reshape(M.shape)


def eccentric_anomaly(mean_anomaly, eccentricity: float, tol: float = KEPLER_TOL, max_iter: int = KEPLER_MAX_ITER):
    """Solve Kepler's equation M = E - e sin E for E in [0, 2*pi].

    Newton steps inside a shrinking bracket; a step that would leave the
    bracket is replaced by bisection. Each element is solved independently.
    """
    E, _, _ = solve_kepler(mean_anomaly, eccentricity, tol, max_iter)
    return _scalar_or_array(E)


def sample_theta(uniform_draw, eccentricity: float):
    """Map uniform draws in [0, 1) to true anomalies distributed per :func:`pdf`.

    The draw is the orbital phase, i.e. the mean anomaly over 2*pi.
    """
    u = np.asarray(uniform_draw, dtype=float)
    if np.any((u < 0) | (u >= 1)):
        raise DomainError("uniform draws must lie in [0, 1)")
    E = np.asarray(eccentric_anomaly(TWO_PI * u, eccentricity))
    half = E / 2.0
    theta = 2.0 * np.arctan2(
        math.sqrt(1 + eccentricity) * np.sin(half), math.sqrt(1 - eccentricity) * np.cos(half)
    )
    theta = np.where(theta < 0, theta + TWO_PI, theta)
    return _scalar_or_array(theta)
