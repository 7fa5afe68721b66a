"""Monte-Carlo convergence: standard error and deviation from quadrature vs repetitions.

    python scripts/convergence.py [--wavelength 633] [--axis x] [--max 16000]
"""

import argparse

import numpy as np

from dispersim.crystal import CrystalFilm
from dispersim.engine import SimulationConfig, deterministic_point, simulate_point
from dispersim.physics import NM


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--wavelength", type=float, default=633.0, help="nm")
    ap.add_argument("--axis", choices=("x", "y"), default="x")
    ap.add_argument("--thickness", type=float, default=3e-6)
    ap.add_argument("--max", type=int, default=16000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    film = CrystalFilm(thickness=args.thickness)
    w = args.wavelength * NM
    exact = deterministic_point(SimulationConfig(film=film), w, args.axis).n
    print(f"quadrature n_{args.axis}({args.wavelength:g} nm) = {exact:.10f}")
    print(f"{'N':>7} {'n_mc':>14} {'stderr':>10} {'z':>7} {'se*sqrt(N)':>11}")
    N = 250
    while N <= args.max:
        p = simulate_point(SimulationConfig(film=film, samples_per_point=N, seed=args.seed), w, args.axis)
        print(f"{N:>7} {p.n:14.10f} {p.stderr:10.3e} {(p.n - exact) / p.stderr:7.2f} {p.stderr * np.sqrt(N):11.4e}")
        N *= 2


if __name__ == "__main__":
    main()
