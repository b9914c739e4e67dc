"""Median averaged regret of the policy against the fixed-rule baseline.

    python3 scripts/regret_sweep.py --preset slow-sine --n 2000 --T 2000 --seeds 30
"""

import argparse
import time

import numpy as np

from driftshift import experiment, sim


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--preset", default="slow-sine", choices=sim.PRESETS)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--T", type=int, default=2000)
    ap.add_argument("--seeds", type=int, default=30)
    ap.add_argument("--delta", type=float, default=0.05)
    ap.add_argument("--beta-bar", type=int, default=1)
    args = ap.parse_args()

    est = experiment.EstimatorConfig(args.delta, args.beta_bar)
    interval = (args.T // 2, args.T)
    print("seed  regret    baseline  mean|pi_hat-pi|  mean q_hat")
    regrets, bases = [], []
    start = time.perf_counter()
    for seed in range(args.seeds):
        spec = sim.preset(args.preset, n0=args.n, T=args.T, seed=seed)
        res = experiment.run_replication(spec, est, interval)
        base = experiment.fixed_rule_regret(spec, interval)
        regrets.append(res.report.averaged)
        bases.append(base)
        pi_err = np.mean(np.abs(res.column("pi_hat") - res.column("pi_true")))
        print(f"{seed:4d}  {regrets[-1]:.5f}  {base:.5f}   {pi_err:.5f}          {res.column('q_hat').mean():.1f}")
    print(f"median regret {np.median(regrets):.5f}, median baseline {np.median(bases):.5f}, "
          f"{time.perf_counter() - start:.0f}s")


if __name__ == "__main__":
    main()
