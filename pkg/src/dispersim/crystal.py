"""NPP crystallographic constants and the layer geometry seen by a photon.

NPP is monoclinic P2_1 with the two molecules of the cell related by the
screw axis along b, so a beam travelling along b meets one molecule every
b/2. Each such layer offers one molecule per a-c cross-section.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from dispersim.physics import ANGSTROM

AVOGADRO = 6.02214076e23


@dataclass(frozen=True)
class UnitCell:
    a: float
    b: float
    c: float
    beta: float  # degrees
    z_molecules: int = 2
    mol_weight: float = 222.0  # g/mol
    density: float = 1.36  # g/cm³
    layers_along_b: int | None = None  # molecular planes per cell along b; defaults to z_molecules

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0 and self.c > 0):
            raise ValueError("lattice constants must be positive")
        # beta == 90 admitted as the orthogonal limit
        if self.beta != 90 and not (90 < self.beta < 180):
            raise ValueError(f"monoclinic beta must lie in (90, 180) degrees, got {self.beta}")
        if self.z_molecules < 1:
            raise ValueError("z_molecules must be >= 1")
        if self.layers_along_b is not None and self.layers_along_b < 1:
            raise ValueError("layers_along_b must be >= 1")

    @property
    def layers(self) -> int:
        return self.z_molecules if self.layers_along_b is None else self.layers_along_b

    def volume(self) -> float:
        return cell_volume(self)

    def calculated_density(self) -> float:
        """X-ray density in g/cm³ from Z·M / (N_A·V)."""
        return self.z_molecules * self.mol_weight / (AVOGADRO * self.volume() * 1e6)


NPP_CELL = UnitCell(
    a=5.261 * ANGSTROM,
    b=14.908 * ANGSTROM,
    c=7.185 * ANGSTROM,
    beta=105.18,
    z_molecules=2,
    mol_weight=222.0,
    density=1.36,
)

NPP_FRAME_ANGLE = 58.6  # degrees, crystal b axis to N(1)-N(2) charge-transfer axis


@dataclass(frozen=True)
class CrystalFilm:
    cell: UnitCell = NPP_CELL
    thickness: float = 3e-6
    propagation_axis: str = "b"
    frame_angle: float = NPP_FRAME_ANGLE

    def __post_init__(self):
        if not self.thickness > 0:
            raise ValueError(f"thickness must be positive, got {self.thickness!r}")


def cell_volume(cell: UnitCell) -> float:
    """Monoclinic cell volume a·b·c·sin(beta) in m³."""
    return cell.a * cell.b * cell.c * math.sin(math.radians(cell.beta))


def layer_spacing(film: CrystalFilm) -> float:
    if film.propagation_axis != "b":
        raise ValueError(f"unsupported propagation axis {film.propagation_axis!r}; only 'b' is modelled")
    return film.cell.b / film.cell.layers


def layer_count(film: CrystalFilm) -> int:
    """Number of molecular layers crossed over the film thickness (at least one)."""
    spacing = layer_spacing(film)
    if film.thickness < spacing:
        warnings.warn("film thinner than one layer spacing; using a single layer", stacklevel=2)
        return 1
    return max(1, round(film.thickness / spacing))


def molecule_area(cell: UnitCell) -> float:
    """Cross-section per molecule transverse to b, in m².

    The a-c face area a·c·sin(beta) is shared by the molecules lying in one
    layer, i.e. z_molecules / layers of them.
    """
    face = cell.a * cell.c * math.sin(math.radians(cell.beta))
    return face * cell.layers / cell.z_molecules


def describe(film: CrystalFilm) -> dict[str, float | int | str]:
    """Flat key/value view of the cell plus derived layer geometry (SI units)."""
    cell = film.cell
    return {
        "a_m": cell.a,
        "b_m": cell.b,
        "c_m": cell.c,
        "beta_deg": cell.beta,
        "z_molecules": cell.z_molecules,
        "mol_weight_g_per_mol": cell.mol_weight,
        "density_g_per_cm3": cell.density,
        "volume_m3": cell_volume(cell),
        "calculated_density_g_per_cm3": cell.calculated_density(),
        "thickness_m": film.thickness,
        "propagation_axis": film.propagation_axis,
        "frame_angle_deg": film.frame_angle,
        "layer_spacing_m": layer_spacing(film),
        "layer_count": layer_count(film),
        "molecule_area_m2": molecule_area(cell),
    }
