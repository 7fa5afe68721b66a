import math

import pytest

from dispersim.calibration import (
    Bounds,
    CalibrationProblem,
    CalibrationResult,
    Target,
    calibrate,
    golden_section,
    objective,
    table_targets,
    validate,
)
from dispersim.crystal import CrystalFilm
from dispersim.engine import deterministic_index
from dispersim.errors import CalibrationError
from dispersim.orbit import NPP_ORBIT, Orbit
from dispersim.physics import NM
from dispersim.refmodels import experimental_wavelengths_nm

TRUTH = Orbit(eccentricity=0.3, semimajor=1.41e-10, charge=14.0)


def synthetic(orbit, axes=("x", "y"), wavelengths_nm=(532, 1064)):
    film = CrystalFilm()
    return tuple(
        Target(w * NM, axis, deterministic_index(orbit, film, w * NM, axis)) for w in wavelengths_nm for axis in axes
    )


@pytest.fixture(scope="module")
def synthetic_result():
    return calibrate(CalibrationProblem(targets=synthetic(TRUTH)))


@pytest.fixture(scope="module")
def table_result():
    return calibrate(CalibrationProblem(targets=table_targets("x", (532, 1064))))


def test_golden_section_parabola():
    x, fx = golden_section(lambda v: (v - 0.3) ** 2, 0.0, 1.0, xtol=1e-12)
    assert x == pytest.approx(0.3, abs=1e-9) and fx < 1e-18


def test_synthetic_recovery(synthetic_result):
    r = synthetic_result
    assert r.objective_value < 1e-10
    # u and Z enter only through u²/Z, so that ratio and e are what the data pins down
    assert r.eccentricity == pytest.approx(TRUTH.eccentricity, rel=1e-3)
    assert r.semimajor**2 / r.charge == pytest.approx(TRUTH.semimajor**2 / TRUTH.charge, rel=1e-3)


def test_trace_is_monotone_and_in_bounds(synthetic_result):
    values = [e["objective"] for e in synthetic_result.trace]
    assert all(b <= a for a, b in zip(values, values[1:]))
    bounds = Bounds()
    for name, v in zip(("eccentricity", "semimajor", "charge"),
                       (synthetic_result.eccentricity, synthetic_result.semimajor, synthetic_result.charge)):
        lo, hi = bounds.interval(name)
        assert lo <= v <= hi


def test_calibration_is_deterministic(table_result):
    again = calibrate(CalibrationProblem(targets=table_targets("x", (532, 1064))))
    assert again.trace == table_result.trace
    assert again.to_dict() == table_result.to_dict()


def test_table_fit_anchors_close(table_result):
    # (n - 1) scales as 1/sqrt(lambda); the measured pair is slightly flatter, so no exact fit exists
    report = validate(table_result, table_targets("x", (532, 1064)))
    assert report.max_error < 1.0
    assert table_result.objective_value == pytest.approx(sum((r["percent_error"] / 100) ** 2 for r in report.rows))


def test_table_holdout_error(table_result):
    holdout = table_targets("x", [w for w in experimental_wavelengths_nm() if w not in (532, 1064)])
    report = validate(table_result, holdout)
    assert len(report.rows) == 8
    assert report.max_error < 8.0
    assert report.min_error <= report.max_error


def test_validate_percent_error_by_hand():
    t = Target(633 * NM, "x", 2.0)
    row = validate(NPP_ORBIT, [t]).rows[0]
    n = deterministic_index(NPP_ORBIT, CrystalFilm(), 633 * NM, "x")
    assert row["percent_error"] == pytest.approx(abs(n - 2.0) / 2.0 * 100, rel=1e-15)


def test_infeasible_bounds():
    with pytest.raises(ValueError):
        Bounds(charge=(5.0, 2.0))


def test_problem_validation():
    with pytest.raises(ValueError):
        CalibrationProblem(targets=synthetic(TRUTH, axes=("x",), wavelengths_nm=(532,)))
    with pytest.raises(ValueError):
        CalibrationProblem(targets=(Target(532 * NM, "x", 2.2), Target(532 * NM, "y", 2.0)))


def test_objective_non_finite_everywhere_fails():
    problem = CalibrationProblem(targets=synthetic(TRUTH), bounds=Bounds(eccentricity=(0.0, 0.0)))
    assert objective(problem, 1.2, 1.4e-10, 3.9) == math.inf
    bad = CalibrationProblem(targets=synthetic(TRUTH), grid_points=2,
                             bounds=Bounds(semimajor=(1e-10, 1e-10), charge=(1.0, 1.0)))
    result = calibrate(bad)  # finite but poor fit is still a result
    assert isinstance(result, CalibrationResult)


def test_calibration_error_when_objective_nan(monkeypatch):
    import dispersim.calibration as cal

    monkeypatch.setattr(cal, "objective", lambda *a, **k: math.nan)
    with pytest.raises(CalibrationError):
        cal.calibrate(CalibrationProblem(targets=synthetic(TRUTH), grid_points=2))


@pytest.mark.xfail(strict=True, reason="literal delay relation needs Z near 15 to match the measured scale")
def test_table_fit_lands_near_published_parameters(table_result):
    assert table_result.eccentricity == pytest.approx(0.26, rel=0.2)
    assert table_result.charge == pytest.approx(3.9, rel=0.2)
    assert table_result.semimajor == pytest.approx(1.4e-10, rel=0.2)


@pytest.mark.xfail(strict=True, reason="published parameters give n_x(633 nm) near 6.1 under the literal relation")
def test_published_parameters_reproduce_table():
    report = validate(NPP_ORBIT, table_targets("x", experimental_wavelengths_nm()))
    assert report.max_error <= 8.0
