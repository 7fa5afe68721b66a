"""Monte-Carlo and quadrature evaluation of the film refractive index.

A photon crossing the film is delayed once per molecular layer. With the
total delay sum_tau over a film of thickness L, the index follows from

    n = 1 + c0 * sum_tau / L.

Monte-Carlo mode draws one electron angle per layer from the orbit's
presence density; deterministic mode replaces the sum with
layers * E[tau] evaluated by adaptive quadrature.

Reproducibility: repetition k draws from PCG64 seeded with
SeedSequence(seed, spawn_key=(k,)). Repetitions are processed in fixed-size
blocks whose composition does not depend on the worker count, and the
per-repetition results are reduced in index order, so output is
bit-identical for any number of threads.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numba import njit
from scipy import integrate

from dispersim import orbit as orbit_mod
from dispersim.crystal import CrystalFilm, layer_count
from dispersim.errors import ConvergenceError, IonizationError
from dispersim.interaction import IONIZATION_THRESHOLD_EV, InteractionContext, ionization_guard
from dispersim.orbit import KEPLER_MAX_ITER, KEPLER_TOL, NPP_ORBIT, Orbit, kepler_scalar
from dispersim.physics import CONSTANTS, NM, in_transparency_window, photon_energy

AXES = ("x", "y")
MODES = ("monte_carlo", "deterministic")
TABLE_WAVELENGTHS_NM = (509, 532, 546, 577, 589, 633, 644, 690, 1064, 1340)
RNG_NAME = "numpy.random.PCG64 via SeedSequence(seed, spawn_key=(repetition,))"
BLOCK = 64  # repetitions per work unit; fixed so results never depend on thread count
QUAD_RTOL = 1e-10


def index_from_delays(sum_tau, thickness: float):
    """n = 1 + (c0 / L) * sum_tau."""
    if not thickness > 0:
        raise ValueError("thickness must be positive")
    if np.any(np.asarray(sum_tau) < 0):
        raise ValueError("summed delay must be non-negative")
    return 1.0 + CONSTANTS.c0 / thickness * sum_tau


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get("DISPERSIM_THREADS", "").strip()
        threads = int(env) if env else 1
    return max(1, int(threads))


@dataclass(frozen=True)
class SimulationConfig:
    film: CrystalFilm = field(default_factory=CrystalFilm)
    orbit: Orbit = NPP_ORBIT
    wavelengths: tuple[float, ...] = tuple(w * NM for w in TABLE_WAVELENGTHS_NM)
    axes: tuple[str, ...] = AXES
    samples_per_point: int = 1000
    seed: int = 0
    mode: str = "monte_carlo"
    frame_offset: float = 0.0  # rad, added to theta in the cos/sin projections
    threads: int | None = None  # None: DISPERSIM_THREADS, else 1

    def __post_init__(self):
        object.__setattr__(self, "wavelengths", tuple(float(w) for w in self.wavelengths))
        object.__setattr__(self, "axes", tuple(self.axes))
        if not self.wavelengths:
            raise ValueError("at least one wavelength is required")
        if any(not w > 0 for w in self.wavelengths):
            raise ValueError("wavelengths must be positive")
        if not self.axes:
            raise ValueError("axis set is empty")
        bad = [a for a in self.axes if a not in AXES]
        if bad:
            raise ValueError(f"unknown axes {bad}; expected a subset of {AXES}")
        if self.samples_per_point < 1:
            raise ValueError("samples_per_point must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass(frozen=True)
class DispersionPoint:
    wavelength: float  # m
    axis: str
    n: float
    stderr: float
    sum_tau: float  # s (mean over repetitions in MC mode)
    layer_count: int

    @property
    def wavelength_nm(self) -> float:
        return self.wavelength / NM


@dataclass
class DispersionTable:
    points: list[DispersionPoint]
    metadata: dict

    def point(self, wavelength: float, axis: str) -> DispersionPoint:
        for p in self.points:
            if p.axis == axis and math.isclose(p.wavelength, wavelength, rel_tol=1e-12):
                return p
        raise KeyError((wavelength, axis))

    def column(self, axis: str) -> np.ndarray:
        return np.array([p.n for p in self.points if p.axis == axis])


def _context(config: SimulationConfig, wavelength: float) -> InteractionContext:
    return InteractionContext(
        orbit=config.orbit, photon_energy=photon_energy(wavelength), frame_offset=config.frame_offset
    )


def _check_wavelengths(wavelengths) -> None:
    rejected = [w for w in wavelengths if not ionization_guard(photon_energy(w))]
    if rejected:
        listed = ", ".join(f"{w / NM:g} nm" for w in rejected)
        raise IonizationError(
            f"photon energy reaches the {IONIZATION_THRESHOLD_EV} eV ionization threshold at: {listed}"
        )
    for w in wavelengths:
        if not in_transparency_window(w):
            warnings.warn(f"{w / NM:g} nm lies outside the NPP transparency window", stacklevel=3)


def _theta_to_anomaly(theta: float, ecc: float) -> float:
    E = 2.0 * math.atan2(math.sqrt(1 - ecc) * math.sin(theta / 2), math.sqrt(1 + ecc) * math.cos(theta / 2))
    return E % orbit_mod.TWO_PI


@lru_cache(maxsize=4096)
def projection_moment(eccentricity: float, axis: str, frame_offset: float = 0.0) -> float:
    """E[|proj(theta + offset)| * (r/u)²] under the orbit presence density.

    Multiplying by prefactor * u² gives the expected single-layer delay.
    Integrated over the eccentric anomaly, where the density becomes
    (1 - e cos E) / 2pi and the integrand is a trig polynomial between the
    zeros of the projection.
    """
    if axis not in AXES:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    ecc = eccentricity
    if ecc == 0.0:
        # uniform density on a circle: mean |cos| for any axis and offset
        return 2.0 / math.pi
    root = math.sqrt(1 - ecc**2)
    c0, s0 = math.cos(frame_offset), math.sin(frame_offset)

    def integrand(E):
        cE, sE = math.cos(E), math.sin(E)
        cos_t, sin_t = cE - ecc, root * sE  # times (1 - e cos E)
        proj = cos_t * c0 - sin_t * s0 if axis == "x" else sin_t * c0 + cos_t * s0
        return abs(proj) * (1 - ecc * cE) ** 2

    base = math.pi / 2 if axis == "x" else 0.0
    zeros = {_theta_to_anomaly((base - frame_offset + k * math.pi) % orbit_mod.TWO_PI, ecc) for k in range(2)}
    edges = sorted({0.0, orbit_mod.TWO_PI, *(z for z in zeros if 0 < z < orbit_mod.TWO_PI)})
    total = 0.0
    for lo, hi in zip(edges, edges[1:]):
        value, _ = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=QUAD_RTOL, limit=200)
        total += value
    return total / orbit_mod.TWO_PI


def expected_tau(orbit: Orbit, wavelength: float, axis: str, frame_offset: float = 0.0) -> float:
    """Mean single-layer delay (s) at ``wavelength`` for the given polarisation axis."""
    ctx = InteractionContext(orbit=orbit, photon_energy=photon_energy(wavelength), frame_offset=frame_offset)
    return ctx.prefactor * orbit.semimajor**2 * projection_moment(orbit.eccentricity, axis, frame_offset)


def deterministic_index(
    orbit: Orbit, film: CrystalFilm, wavelength: float, axis: str, frame_offset: float = 0.0
) -> float:
    layers = layer_count(film)
    return float(index_from_delays(layers * expected_tau(orbit, wavelength, axis, frame_offset), film.thickness))


def deterministic_point(config: SimulationConfig, wavelength: float, axis: str) -> DispersionPoint:
    if axis not in AXES:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    _check_wavelengths([wavelength])
    layers = layer_count(config.film)
    sum_tau = layers * expected_tau(config.orbit, wavelength, axis, config.frame_offset)
    n = float(index_from_delays(sum_tau, config.film.thickness))
    return DispersionPoint(wavelength, axis, n, 0.0, sum_tau, layers)


def substream(seed: int, repetition: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(repetition,))))


@njit(cache=True)
def _layer_sums(draws, ecc, cos0, sin0, out_x, out_y):
    # one row per repetition: sample every layer's angle, accumulate |proj| (r/u)²
    root = math.sqrt(1.0 - ecc * ecc)
    failures = 0
    for i in range(draws.shape[0]):
        acc_x = 0.0
        acc_y = 0.0
        for j in range(draws.shape[1]):
            E, sE, cE, ok = kepler_scalar(2.0 * math.pi * draws[i, j], ecc, KEPLER_TOL, KEPLER_MAX_ITER)
            if not ok:
                failures += 1
            rho = 1.0 - ecc * cE  # r/u
            cos_t = (cE - ecc) / rho
            sin_t = root * sE / rho
            rho2 = rho * rho
            acc_x += abs(cos_t * cos0 - sin_t * sin0) * rho2
            acc_y += abs(sin_t * cos0 + cos_t * sin0) * rho2
        out_x[i] = acc_x
        out_y[i] = acc_y
    return failures


def _block_sums(config: SimulationConfig, start: int, stop: int, layers: int) -> dict[str, np.ndarray]:
    draws = np.stack([substream(config.seed, k).random(layers) for k in range(start, stop)])
    out_x = np.empty(stop - start)
    out_y = np.empty(stop - start)
    failures = _layer_sums(
        draws, config.orbit.eccentricity, math.cos(config.frame_offset), math.sin(config.frame_offset), out_x, out_y
    )
    if failures:
        raise ConvergenceError(f"Kepler solver failed for {failures} layer draw(s)")
    return {"x": out_x, "y": out_y}


def geometric_sums(config: SimulationConfig) -> dict[str, np.ndarray]:
    """Per-repetition sums of |proj| (r/u)² over all layers, one array per axis.

    Wavelength enters only through the prefactor, so one set of angle draws
    serves every wavelength of the run.
    """
    layers = layer_count(config.film)
    n_rep = config.samples_per_point
    blocks = [(s, min(s + BLOCK, n_rep)) for s in range(0, n_rep, BLOCK)]
    threads = resolve_threads(config.threads)
    if threads == 1 or len(blocks) == 1:
        parts = [_block_sums(config, s, e, layers) for s, e in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _block_sums(config, b[0], b[1], layers), blocks))
    return {axis: np.concatenate([p[axis] for p in parts]) for axis in AXES}


def _mc_point(config, wavelength, axis, sums, layers) -> DispersionPoint:
    ctx = _context(config, wavelength)
    sum_tau = ctx.prefactor * config.orbit.semimajor**2 * sums
    n_rep = index_from_delays(sum_tau, config.film.thickness)
    N = n_rep.size
    stderr = float(np.std(n_rep, ddof=1) / math.sqrt(N)) if N > 1 else 0.0
    return DispersionPoint(wavelength, axis, float(np.mean(n_rep)), stderr, float(np.mean(sum_tau)), layers)


@lru_cache(maxsize=4)
def _shared_sums(film, eccentricity, seed, samples, frame_offset) -> dict[str, np.ndarray]:
    # the draws depend on neither wavelength, axis, u nor Z, so point queries share them
    orbit = Orbit(eccentricity, NPP_ORBIT.semimajor, NPP_ORBIT.charge)
    cfg = SimulationConfig(film=film, orbit=orbit, seed=seed, samples_per_point=samples, frame_offset=frame_offset)
    sums = geometric_sums(cfg)
    for arr in sums.values():
        arr.setflags(write=False)
    return sums


def simulate_point(config: SimulationConfig, wavelength: float, axis: str) -> DispersionPoint:
    """Monte-Carlo estimate of n at one wavelength, mean and standard error over repetitions."""
    if axis not in AXES:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    _check_wavelengths([wavelength])
    single = SimulationConfig(**{**_shallow(config), "wavelengths": (wavelength,), "axes": (axis,)})
    sums = _shared_sums(
        config.film, config.orbit.eccentricity, config.seed, config.samples_per_point, config.frame_offset
    )[axis]
    return _mc_point(single, wavelength, axis, sums, layer_count(config.film))


def _shallow(config: SimulationConfig) -> dict:
    return {f: getattr(config, f) for f in config.__dataclass_fields__}


def run_metadata(config: SimulationConfig) -> dict:
    o = config.orbit
    return {
        "mode": config.mode,
        "seed": config.seed,
        "samples_per_point": config.samples_per_point,
        "eccentricity": o.eccentricity,
        "semimajor_m": o.semimajor,
        "charge": o.charge,
        "period_s": o.period,
        "frame_offset_rad": config.frame_offset,
        "thickness_m": config.film.thickness,
        "layers": layer_count(config.film),
        "rng": RNG_NAME,
        "numpy_version": np.__version__,
    }


def simulate_dispersion(config: SimulationConfig) -> DispersionTable:
    """Evaluate every (wavelength, axis) pair of the configuration."""
    _check_wavelengths(config.wavelengths)
    layers = layer_count(config.film)
    points = []
    if config.mode == "deterministic":
        for w in config.wavelengths:
            for axis in config.axes:
                points.append(deterministic_point(config, w, axis))
    else:
        sums = geometric_sums(config)
        for w in config.wavelengths:
            for axis in config.axes:
                points.append(_mc_point(config, w, axis, sums[axis], layers))
    return DispersionTable(points=points, metadata=run_metadata(config))
