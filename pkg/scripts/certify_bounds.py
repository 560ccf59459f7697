"""Compare the achieved worst-case ratio with the curvature bound on random coverage instances.

Usage: python3 scripts/certify_bounds.py [--n 8] [--trials 200] [--seed 0]
"""

import argparse

import numpy as np

from resilimat.bounds import bound_submodular_uniform
from resilimat.matroid import UniformMatroid
from resilimat.oracles import optimal_resilient, worst_case_removal
from resilimat.setfn import Memo, curvature_kappa, make_coverage
from resilimat.solver import solve_resilient


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    rng = np.random.default_rng(args.seed)
    worst_gap, violations = float("inf"), 0
    for _ in range(args.trials):
        n = args.n
        sets = [rng.choice(3 * n, size=int(rng.integers(1, n)), replace=False).tolist() for _ in range(n)]
        f = make_coverage(sets)
        alpha = int(rng.integers(2, n))
        beta = int(rng.integers(0, alpha))
        i, ip = UniformMatroid(n, alpha), UniformMatroid(n, beta)
        memo = Memo(f)
        a = solve_resilient(f, i, ip).a
        got = worst_case_removal(memo, a, ip).value
        best = optimal_resilient(memo, i, ip).value
        ratio = 1.0 if best <= 0 else got / best
        gap = ratio - bound_submodular_uniform(curvature_kappa(f).kappa, alpha, beta)
        worst_gap = min(worst_gap, gap)
        violations += gap < -1e-9
    print(f"trials={args.trials} violations={violations} min(ratio - bound)={worst_gap:.4f}")


if __name__ == "__main__":
    main()
