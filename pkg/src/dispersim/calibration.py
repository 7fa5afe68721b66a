"""Recover (eccentricity, semimajor axis, effective charge) from measured indices.

The objective is the sum of squared relative index errors over the targets,
evaluated with the deterministic (quadrature) engine so the search is
noise-free. Search: a coarse grid scan over the bounds box followed by
cyclic coordinate-wise golden-section refinement; each cycle ends with a
golden-section pattern move along that cycle's net displacement, which
keeps the coordinate search from zig-zagging down curved valleys. A move
is only accepted when it lowers the objective, so the best-so-far value
along the trace never increases.

Note that u and Z enter the index only through u²/Z, so at most two
combinations, eccentricity and u²/Z, are identifiable from any target set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from dispersim.crystal import CrystalFilm
from dispersim.engine import deterministic_index
from dispersim.errors import CalibrationError, DomainError
from dispersim.orbit import Orbit
from dispersim.physics import ANGSTROM, NM
from dispersim.refmodels import experimental

PARAMS = ("eccentricity", "semimajor", "charge")
INV_PHI = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class Target:
    wavelength: float  # m
    axis: str
    n_exp: float

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError("target wavelength must be positive")
        if self.axis not in ("x", "y"):
            raise ValueError(f"target axis must be 'x' or 'y', got {self.axis!r}")
        if not self.n_exp >= 1:
            raise ValueError("target index must be >= 1")


@dataclass(frozen=True)
class Bounds:
    eccentricity: tuple[float, float] = (0.01, 0.6)
    semimajor: tuple[float, float] = (1.33 * ANGSTROM, 1.47 * ANGSTROM)
    charge: tuple[float, float] = (1.0, 40.0)

    def __post_init__(self):
        for name in PARAMS:
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"infeasible bounds for {name}: min {lo} > max {hi}")
        if not (0 <= self.eccentricity[0] and self.eccentricity[1] < 1):
            raise ValueError("eccentricity bounds must lie in [0, 1)")
        if not (self.semimajor[0] > 0 and self.charge[0] > 0):
            raise ValueError("semimajor and charge bounds must be positive")

    def interval(self, name: str) -> tuple[float, float]:
        return getattr(self, name)


@dataclass(frozen=True)
class CalibrationProblem:
    targets: tuple[Target, ...]
    bounds: Bounds = field(default_factory=Bounds)
    film: CrystalFilm = field(default_factory=CrystalFilm)
    frame_offset: float = 0.0
    grid_points: int = 20
    rel_tol: float = 1e-4
    max_cycles: int = 200

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if len(self.targets) < 2:
            raise ValueError("calibration needs at least two targets")
        if len({t.wavelength for t in self.targets}) < 2:
            raise ValueError("calibration targets must span at least two distinct wavelengths")
        if self.grid_points < 2:
            raise ValueError("grid_points must be >= 2")


@dataclass
class CalibrationResult:
    eccentricity: float
    semimajor: float
    charge: float
    objective_value: float
    evaluations: int
    trace: list[dict]

    @property
    def orbit(self) -> Orbit:
        return Orbit(eccentricity=self.eccentricity, semimajor=self.semimajor, charge=self.charge)

    def to_dict(self) -> dict:
        return {
            "eccentricity": self.eccentricity,
            "semimajor_m": self.semimajor,
            "charge": self.charge,
            "objective_value": self.objective_value,
            "evaluations": self.evaluations,
            "trace": self.trace,
        }


def table_targets(axis: str, wavelengths_nm) -> tuple[Target, ...]:
    """Targets taken from the bundled measured indices."""
    return tuple(Target(w * NM, axis, experimental(axis, w)) for w in wavelengths_nm)


def objective(problem: CalibrationProblem, eccentricity: float, semimajor: float, charge: float) -> float:
    try:
        orbit = Orbit(eccentricity=eccentricity, semimajor=semimajor, charge=charge)
    except DomainError:
        return math.inf
    total = 0.0
    for t in problem.targets:
        n = deterministic_index(orbit, problem.film, t.wavelength, t.axis, problem.frame_offset)
        total += ((n - t.n_exp) / t.n_exp) ** 2
    return total


def golden_section(f, lo: float, hi: float, xtol: float):
    """Bounded golden-section search; returns (x, f(x)) for the best point seen."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    best = min((fc, c), (fd, d))
    while b - a > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
            best = min(best, (fc, c))
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
            best = min(best, (fd, d))
    return best[1], best[0]


def _pattern_move(obj, bounds: Bounds, before: list[float], x: list[float], fx: float):
    # line search along the net displacement of the last cycle, kept inside the box
    step = [a - b for a, b in zip(x, before)]
    t_max = math.inf
    for xi, di, name in zip(x, step, PARAMS):
        lo, hi = bounds.interval(name)
        if di > 0:
            t_max = min(t_max, (hi - xi) / di)
        elif di < 0:
            t_max = min(t_max, (lo - xi) / di)
    if not math.isfinite(t_max) or t_max <= 0:
        return x, fx
    t_max = min(t_max, 100.0)
    t, ft = golden_section(lambda t: obj([xi + t * di for xi, di in zip(x, step)]), 0.0, t_max, 1e-12 * t_max)
    if ft < fx:
        return [xi + t * di for xi, di in zip(x, step)], ft
    return x, fx


def _entry(stage: str, x: list[float], value: float) -> dict:
    return {"stage": stage, **dict(zip(PARAMS, x)), "objective": value}


def calibrate(problem: CalibrationProblem) -> CalibrationResult:
    count = 0

    def obj(x) -> float:
        nonlocal count
        count += 1
        return objective(problem, *x)

    axes = [np.linspace(*problem.bounds.interval(name), problem.grid_points) for name in PARAMS]
    best_x, best_f = None, math.inf
    for e in axes[0]:
        for u in axes[1]:
            for z in axes[2]:
                value = obj((float(e), float(u), float(z)))
                if math.isfinite(value) and value < best_f:
                    best_x, best_f = [float(e), float(u), float(z)], value
    if best_x is None:
        raise CalibrationError("objective is non-finite at every grid point")

    trace = [_entry("grid", best_x, best_f)]
    x, fx = best_x, best_f
    for cycle in range(problem.max_cycles):
        before, f_before = list(x), fx
        for i, name in enumerate(PARAMS):
            lo, hi = problem.bounds.interval(name)
            if hi == lo:
                continue

            def line(v, i=i):
                trial = list(x)
                trial[i] = v
                return obj(trial)

            v, fv = golden_section(line, lo, hi, xtol=1e-12 * (hi - lo))
            if fv < fx:
                x[i], fx = v, fv
            trace.append(_entry(f"cycle {cycle}: {name}", x, fx))
        x, fx = _pattern_move(obj, problem.bounds, before, x, fx)
        trace.append(_entry(f"cycle {cycle}: pattern", x, fx))
        change = max(abs(a - b) / abs(b) for a, b in zip(x, before))
        # small steps alone are not convergence in a narrow valley; also require a stalled objective
        stalled = f_before == 0 or (f_before - fx) < 0.01 * f_before
        if change < problem.rel_tol and stalled:
            break

    return CalibrationResult(
        eccentricity=x[0],
        semimajor=x[1],
        charge=x[2],
        objective_value=fx,
        evaluations=count,
        trace=trace,
    )


@dataclass
class ValidationReport:
    rows: list[dict]
    max_error: float
    min_error: float


def validate(result: CalibrationResult | Orbit, holdout, film: CrystalFilm | None = None,
             frame_offset: float = 0.0) -> ValidationReport:
    """Percent error |n_sim - n_exp| / n_exp * 100 for each holdout target."""
    orbit = result.orbit if isinstance(result, CalibrationResult) else result
    film = film or CrystalFilm()
    rows = []
    for t in holdout:
        n_sim = deterministic_index(orbit, film, t.wavelength, t.axis, frame_offset)
        rows.append({
            "wavelength_nm": t.wavelength / NM,
            "axis": t.axis,
            "n_exp": t.n_exp,
            "n_sim": n_sim,
            "percent_error": abs(n_sim - t.n_exp) / t.n_exp * 100.0,
        })
    if not rows:
        return ValidationReport(rows, 0.0, 0.0)
    errors = [r["percent_error"] for r in rows]
    return ValidationReport(rows, max(errors), min(errors))
