"""Run the sensor-selection sweep and print a per-cell table.

Usage: python3 scripts/run_sweep.py [--seed 0] [--runs 20] [--workers 4] [--csv out/sweep.csv]
"""

import argparse

from resilimat.harness import ExperimentConfig, run_experiment


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--rollouts", type=int, default=200)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", default=None)
    args = p.parse_args()
    cfg = ExperimentConfig(seed=args.seed, runs=args.runs, rollouts=args.rollouts,
                           workers=args.workers, output=args.csv)
    _, summary = run_experiment(cfg)
    print(f"{'alpha':>5} {'beta':>4} {'optimal':>10} {'s-LQG':>10} {'logdet':>10} {'random*':>10} {'ratio':>7}")
    for c in summary["cells"]:
        if c["beta"] >= c["alpha"]:
            continue
        costs = [c[s]["mean_cost"] for s in ("optimal", "s-LQG", "logdet", "random*")]
        print(f"{c['alpha']:>5} {c['beta']:>4} " + " ".join(f"{v:>10.1f}" for v in costs)
              + f" {c.get('value_ratio', float('nan')):>7.3f}")


if __name__ == "__main__":
    main()
