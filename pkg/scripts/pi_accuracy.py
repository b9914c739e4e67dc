"""Prior-estimate error and chosen window over time on a preset.

    python3 scripts/pi_accuracy.py --preset stationary --n 1000 --T 2000 --seeds 20
"""

import argparse

import numpy as np

from driftshift import experiment, sim


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--preset", default="stationary", choices=sim.PRESETS)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--T", type=int, default=2000)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--delta", type=float, default=0.05)
    ap.add_argument("--beta-bar", type=int, default=1)
    args = ap.parse_args()

    est = experiment.EstimatorConfig(args.delta, args.beta_bar)
    times = np.unique(np.linspace(args.T / 10, args.T, 10).astype(int))
    table = np.array([experiment.pi_errors(sim.preset(args.preset, n0=args.n, T=args.T, seed=s), est, times)
                      for s in range(args.seeds)])
    print("t      median |pi_hat-pi|   median q_hat")
    for k, t in enumerate(times):
        print(f"{t:<6d} {np.median(table[:, k, 4]):.4f}               {np.median(table[:, k, 3]):.0f}")


if __name__ == "__main__":
    main()
