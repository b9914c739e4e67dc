"""Median grid-averaged error of the density-ratio estimate across pool sizes.

    python3 scripts/eta_accuracy.py --sizes 500 1000 2000 4000 --seeds 50
"""

import argparse

import numpy as np

from driftshift import densratio, sim
from driftshift.core import MetricSpace


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[500, 1000, 2000])
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--delta", type=float, default=0.05)
    ap.add_argument("--grid", type=float, nargs=3, default=[-2.0, 2.0, 41], metavar=("LO", "HI", "POINTS"))
    args = ap.parse_args()

    grid = np.linspace(args.grid[0], args.grid[1], int(args.grid[2]))
    print("n      median error   median error at x=0   share at 1/2")
    for n in args.sizes:
        errs, centre, flat = [], [], []
        for seed in range(args.seeds):
            spec = sim.preset("stationary", n0=n, T=1, seed=seed)
            vals, _ = densratio.eta_hat_many(grid, sim.generate(spec).pool, MetricSpace.line(), args.delta)
            diff = np.abs(vals - sim.eta_values(spec, grid)[0])
            errs.append(diff.mean())
            centre.append(diff[np.argmin(np.abs(grid))])
            flat.append(np.mean(vals == 0.5))
        print(f"{n:<6d} {np.median(errs):.4f}         {np.median(centre):.4f}                {np.mean(flat):.3f}")


if __name__ == "__main__":
    main()
