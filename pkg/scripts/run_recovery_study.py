#!/usr/bin/env python3
"""Parameter-recovery study: fit synthetic datasets with known ground truth.

For each seed the script draws random four-factor effects, simulates
per-key observations, fits the model, and reports convergence gates plus
95% credible-interval coverage of the true per-key mean energies.

Usage:
    python3 scripts/run_recovery_study.py --seeds 20 --warmup 1000 --draws 1000
"""

import argparse
import sys
import time

import numpy as np

from bytecode_energy.inference import fit


def make_truth(rng):
    sizes = ["load", "constant", "bits32"]
    ops = [f"op{i}" for i in range(10)]
    dtypes = ["int", "long", "float", "double"]
    devices = ["device1", "device2"]
    return {
        "alpha": {s: abs(rng.normal(5e-9, 3e-9)) for s in sizes},
        "beta": {o: abs(rng.normal(5e-8, 4e-8)) for o in ops},
        "gamma": {t: abs(rng.normal(5e-9, 4e-9)) for t in dtypes},
        "delta": {d: abs(rng.normal(3e-9, 3e-9)) for d in devices},
    }


def run_seed(seed, args):
    rng = np.random.default_rng(1000 + seed)
    effects = make_truth(rng)
    sigma = 1.356665e-08
    data = {}
    for s in effects["alpha"]:
        for o in effects["beta"]:
            for t in effects["gamma"]:
                for d in effects["delta"]:
                    mu = (effects["alpha"][s] + effects["beta"][o]
                          + effects["gamma"][t] + effects["delta"][d])
                    data[(s, o, t, d)] = rng.normal(mu, sigma, args.obs)

    start = time.monotonic()
    model = fit(data, chains=args.chains, warmup=args.warmup,
                draws=args.draws, seed=seed)
    elapsed = time.monotonic() - start

    rhats = [v["rhat"] for v in model.summaries.values() if v["rhat"]]
    esss = [v["ess"] for v in model.summaries.values() if v["ess"]]
    covered = total = 0
    for key in list(data)[:: args.stride]:
        truth = (effects["alpha"][key[0]] + effects["beta"][key[1]]
                 + effects["gamma"][key[2]] + effects["delta"][key[3]])
        lo, hi = np.quantile(model.mu_draws(key), [0.025, 0.975])
        covered += lo <= truth <= hi
        total += 1
    return {
        "seed": seed,
        "converged": model.meta["converged"],
        "max_rhat": max(rhats),
        "min_ess": min(esss),
        "coverage": covered / total,
        "checked": total,
        "seconds": elapsed,
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--chains", type=int, default=4)
    parser.add_argument("--warmup", type=int, default=1000)
    parser.add_argument("--draws", type=int, default=1000)
    parser.add_argument("--obs", type=int, default=50,
                        help="observations per pattern key")
    parser.add_argument("--stride", type=int, default=7,
                        help="check coverage on every N-th key")
    args = parser.parse_args(argv)

    print(f"{'seed':>4} {'conv':>5} {'max rhat':>9} {'min ess':>8} "
          f"{'coverage':>9} {'time':>7}")
    covered_all = checked_all = 0
    failures = 0
    for seed in range(args.seeds):
        row = run_seed(seed, args)
        covered_all += row["coverage"] * row["checked"]
        checked_all += row["checked"]
        failures += not row["converged"]
        print(f"{row['seed']:>4} {str(row['converged']):>5} "
              f"{row['max_rhat']:>9.4f} {row['min_ess']:>8.0f} "
              f"{row['coverage']:>9.2f} {row['seconds']:>6.1f}s")
    print(f"\nconverged: {args.seeds - failures}/{args.seeds}, "
          f"overall coverage: {covered_all / checked_all:.3f}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
