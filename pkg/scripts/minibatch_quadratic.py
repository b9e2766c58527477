"""Mini-batch fast gradient method on a noisy quadratic: final gap over seeds.

    python3 scripts/minibatch_quadratic.py [--D 0.05] [--eps 1e-2] [--seeds 30]
"""
import argparse
import math

import numpy as np

from fgmkit.core import Box, CompositeProblem, quadratic_oracle
from fgmkit.prox import EuclideanSetup
from fgmkit.stochastic import StochasticOracle, predicted_sample_budget, stochastic_fgm_solve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--D", type=float, default=0.05)
    ap.add_argument("--eps", type=float, default=1e-2)
    ap.add_argument("--seeds", type=int, default=30)
    args = ap.parse_args()

    n, D = args.n, args.D
    Q = np.diag(np.linspace(0.1, 1.0, n))
    xs = np.random.default_rng(0).uniform(-0.5, 0.5, n)
    b = Q @ xs
    Fs = -0.5 * float(xs @ Q @ xs)

    def sample(x, rng):
        return Q @ x - b + rng.normal(0.0, math.sqrt(D / n), n)

    gaps = []
    for seed in range(args.seeds):
        p = CompositeProblem(quadratic_oracle(Q, b), EuclideanSetup(Box(-np.ones(n), np.ones(n))), L=1.0)
        rep = stochastic_fgm_solve(p, StochasticOracle(sample, D), args.eps, rng=seed)
        gaps.append(p.value(rep.x) - Fs)
    budget = predicted_sample_budget(1.0, n / 2.0, D, args.eps)
    print(f"iterations {rep.iterations}, samples per run {rep.info['samples']} (predicted {budget})")
    print(f"final gap: median {np.median(gaps):.3e}, max {np.max(gaps):.3e}, target {args.eps:g}")


if __name__ == "__main__":
    main()
