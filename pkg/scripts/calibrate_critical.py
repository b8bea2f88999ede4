"""One-off calibration of the critical-window ratio band.

Repeats the critical experiment over several seeds (fewer trials each) and
prints the spread of the median-ratio statistic and the t = 1 KS distance,
which is how the shipped band [0.7, 1.4] was checked.

    python scripts/calibrate_critical.py --seeds 5 --trials 1000
"""

import argparse

import numpy as np

from poisson_er.experiments import merge_overrides, run_experiment, shipped_config


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seeds", type=int, default=5)
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    base = shipped_config("critical")
    ratios, ks = [], []
    for seed in range(args.seeds):
        config = merge_overrides(base, {"seed": 1000 + seed, "trials": args.trials, "workers": args.workers})
        report = run_experiment(config)
        ratio = report.verdicts["max_excursion_median_ratio"]["observed"]
        stat = report.verdicts[f"n={max(config.n_grid)}:ks_m1"]
        ratios.append(ratio)
        ks.append(stat["observed"] / stat["threshold"])
        print(f"seed {config.seed}: ratio={ratio:.3f} ks/threshold={ks[-1]:.2f}")
    print(f"ratio range [{min(ratios):.3f}, {max(ratios):.3f}], mean {np.mean(ratios):.3f}")
    print(f"worst ks/threshold {max(ks):.2f}")


if __name__ == "__main__":
    main()
