"""Classical NPP dispersion references: Cauchy series, two Sellmeier sets, measured indices.

Sellmeier and Cauchy wavelengths are in micrometres; the measured table is
keyed by wavelength in nanometres.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from dispersim.errors import DomainError

EXPERIMENTAL_RESOURCE = "npp_experimental.csv"
SELLMEIER_RESOURCE = "npp_sellmeier.txt"
FORMS = ("ledoux", "datta")
POLE_GUARD = 1e-9


def _read_resource(name: str) -> bytes:
    return resources.files("dispersim").joinpath("data", name).read_bytes()


def dataset_sha256() -> str:
    """Hash over both bundled resources, in a fixed order."""
    h = hashlib.sha256()
    for name in (EXPERIMENTAL_RESOURCE, SELLMEIER_RESOURCE):
        h.update(_read_resource(name))
    return h.hexdigest()


# --- Cauchy -----------------------------------------------------------------


@dataclass(frozen=True)
class CauchyCoeffs:
    A: float  # µm²
    B: float  # µm⁴
    C: float  # µm⁶

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.A, self.B, self.C)):
            raise ValueError("Cauchy coefficients must be finite")


def _warn_window(wavelength_um) -> None:
    lam = np.atleast_1d(wavelength_um)
    if np.any((lam < 0.48) | (lam > 2.0)):
        warnings.warn("wavelength outside the NPP transparency window (0.48-2 µm)", stacklevel=3)


def cauchy_eval(coeffs: CauchyCoeffs, wavelength_um):
    """n = 1 + A/λ² + B/λ⁴ + C/λ⁶."""
    lam = np.asarray(wavelength_um, dtype=float)
    if np.any(~(lam > 0)):
        raise DomainError("wavelength must be positive")
    _warn_window(lam)
    inv2 = 1.0 / lam**2
    n = 1.0 + inv2 * (coeffs.A + inv2 * (coeffs.B + inv2 * coeffs.C))
    return float(n) if n.ndim == 0 else n


def cauchy_fit(points) -> CauchyCoeffs:
    """Coefficients through three (wavelength_um, n) points, solved exactly."""
    pts = [(float(w), float(n)) for w, n in points]
    if len(pts) != 3:
        raise ValueError("cauchy_fit needs exactly three points")
    lams = [w for w, _ in pts]
    if any(not w > 0 for w in lams):
        raise DomainError("wavelengths must be positive")
    if len(set(lams)) != 3:
        raise ValueError("cauchy_fit needs three distinct wavelengths")
    x = np.array([1.0 / w**2 for w in lams])
    M = np.column_stack([x, x**2, x**3])
    rhs = np.array([n - 1.0 for _, n in pts])
    try:
        A, B, C = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular Cauchy system") from exc
    return CauchyCoeffs(float(A), float(B), float(C))


# --- Sellmeier --------------------------------------------------------------


@dataclass(frozen=True)
class SellmeierModel:
    form: str
    axis: str
    A: float
    B: float
    C: float  # µm²
    D: float
    E: float | None = None  # µm², datta form only

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"unknown Sellmeier form {self.form!r}")
        if self.axis not in ("x", "y", "z"):
            raise ValueError(f"unknown axis {self.axis!r}")
        if self.form == "datta" and self.E is None:
            raise ValueError("datta form needs coefficient E")


@lru_cache(maxsize=None)
def _sellmeier_table() -> dict[tuple[str, str], SellmeierModel]:
    raw: dict[tuple[str, str], dict[str, float]] = {}
    for line in _read_resource(SELLMEIER_RESOURCE).decode().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        form, axis, coef = key.split(".")
        raw.setdefault((form, axis), {})[coef] = float(value)
    return {key: SellmeierModel(form=key[0], axis=key[1], **coefs) for key, coefs in raw.items()}


def sellmeier_model(form: str, axis: str) -> SellmeierModel:
    try:
        return _sellmeier_table()[(form, axis)]
    except KeyError:
        raise ValueError(f"no built-in Sellmeier set for form={form!r}, axis={axis!r}") from None


def builtin_sellmeier_models() -> list[SellmeierModel]:
    return list(_sellmeier_table().values())


def _pole_term(coef: float, pole: float, lam2: np.ndarray) -> np.ndarray:
    denom = 1.0 - pole / lam2
    if np.any(np.abs(denom) < POLE_GUARD):
        raise DomainError(f"wavelength sits on the Sellmeier pole lambda² = {pole} µm²")
    return coef / denom


def sellmeier_eval(model: SellmeierModel, wavelength_um):
    lam = np.asarray(wavelength_um, dtype=float)
    if np.any(~(lam > 0)):
        raise DomainError("wavelength must be positive")
    _warn_window(lam)
    lam2 = lam**2
    n2 = model.A + _pole_term(model.B, model.C, lam2)
    if model.form == "ledoux":
        n2 = n2 + model.D * lam2
    else:
        n2 = n2 + _pole_term(model.D, model.E, lam2)
    if np.any(n2 < 0):
        raise DomainError("Sellmeier expression is negative; no real index")
    n = np.sqrt(n2)
    return float(n) if n.ndim == 0 else n


# --- measured indices -------------------------------------------------------


@lru_cache(maxsize=None)
def experimental_table() -> tuple[tuple[int, float, float], ...]:
    """Rows of (wavelength_nm, n_x, n_y) for the ten measured wavelengths."""
    text = _read_resource(EXPERIMENTAL_RESOURCE).decode()
    return tuple(
        (int(r["wavelength_nm"]), float(r["n_x_exp"]), float(r["n_y_exp"]))
        for r in csv.DictReader(io.StringIO(text))
    )


def experimental_wavelengths_nm() -> tuple[int, ...]:
    return tuple(row[0] for row in experimental_table())


def experimental(axis: str, wavelength_nm: float) -> float:
    col = {"x": 1, "y": 2}.get(axis)
    if col is None:
        raise ValueError(f"measured indices exist for axes x and y only, got {axis!r}")
    for row in experimental_table():
        if math.isclose(row[0], wavelength_nm, abs_tol=1e-9):
            return row[col]
    raise KeyError(f"no measured index at {wavelength_nm} nm")
