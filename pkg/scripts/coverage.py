"""Empirical coverage of the 3-sigma Monte-Carlo interval around the quadrature value.

    python scripts/coverage.py [--seeds 400] [--wavelength 633]

Prints the z-score summary per axis and a KS test of the z-scores against N(0, 1).
"""

import argparse

import numpy as np
from scipy import stats

from dispersim.engine import SimulationConfig, deterministic_point, simulate_point
from dispersim.physics import NM


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=400)
    ap.add_argument("--first-seed", type=int, default=0)
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--wavelength", type=float, default=633.0)
    args = ap.parse_args()
    w = args.wavelength * NM

    z = {"x": [], "y": []}
    for seed in range(args.first_seed, args.first_seed + args.seeds):
        cfg = SimulationConfig(samples_per_point=args.samples, seed=seed)
        for axis in z:
            mc = simulate_point(cfg, w, axis)
            z[axis].append((mc.n - deterministic_point(cfg, w, axis).n) / mc.stderr)
    for axis, values in z.items():
        v = np.asarray(values)
        outside = np.flatnonzero(np.abs(v) > 3) + args.first_seed
        ks = stats.kstest(v, "norm")
        print(f"{axis}: mean z {v.mean():+.3f}  sd {v.std(ddof=1):.3f}  |z|>3 at seeds {outside.tolist()}  "
              f"KS p={ks.pvalue:.3f}")
    expected = 2 * stats.norm.sf(3) * args.seeds
    print(f"expected count outside 3 sigma per axis: {expected:.2f}")


if __name__ == "__main__":
    main()
