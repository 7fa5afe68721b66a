"""Calibrate on two measured wavelengths and print simulated vs measured indices.

    python scripts/reproduce_tables.py [--anchors 532,1064] [--joint] [--samples N]

With --samples, a Monte-Carlo run at the fitted parameters is printed next to
the quadrature values.
"""

import argparse

from dispersim.calibration import CalibrationProblem, calibrate, table_targets
from dispersim.crystal import CrystalFilm
from dispersim.engine import SimulationConfig, deterministic_index, simulate_dispersion
from dispersim.physics import ANGSTROM, NM
from dispersim.refmodels import experimental, experimental_wavelengths_nm, sellmeier_eval, sellmeier_model


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--anchors", default="532,1064")
    ap.add_argument("--joint", action="store_true", help="fit x and y together instead of one axis at a time")
    ap.add_argument("--samples", type=int, default=0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    anchors = [int(w) for w in args.anchors.split(",")]
    film = CrystalFilm()

    if args.joint:
        fit = calibrate(CalibrationProblem(targets=table_targets("x", anchors) + table_targets("y", anchors)))
        fits = {"x": fit, "y": fit}
    else:
        fits = {a: calibrate(CalibrationProblem(targets=table_targets(a, anchors))) for a in ("x", "y")}

    for axis, fit in fits.items():
        o = fit.orbit
        print(f"\naxis {axis}: e={o.eccentricity:.4f}  u={o.semimajor / ANGSTROM:.4f} A  Z={o.charge:.3f}  "
              f"u^2/Z={o.semimajor**2 / o.charge / ANGSTROM**2:.5f} A^2  objective={fit.objective_value:.3e}")
        mc = None
        if args.samples:
            cfg = SimulationConfig(film=film, orbit=o, axes=(axis,), samples_per_point=args.samples, seed=args.seed)
            mc = simulate_dispersion(cfg)
        sell = sellmeier_model("datta", axis)
        print(f"{'nm':>6} {'n_exp':>7} {'n_sim':>7} {'err%':>6} {'datta':>7}" + (f" {'n_mc':>7} {'se':>8}" if mc else ""))
        for w in experimental_wavelengths_nm():
            n_exp = experimental(axis, w)
            n = deterministic_index(o, film, w * NM, axis)
            line = f"{w:>6} {n_exp:7.3f} {n:7.3f} {abs(n - n_exp) / n_exp * 100:6.2f} {sellmeier_eval(sell, w / 1000):7.3f}"
            if mc:
                p = mc.point(w * NM, axis)
                line += f" {p.n:7.3f} {p.stderr:8.1e}"
            print(line + ("  *" if w in anchors else ""))


if __name__ == "__main__":
    main()
