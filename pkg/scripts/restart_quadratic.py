"""Restarted method on a strongly convex quadratic: distance per restart and total cost.

    python3 scripts/restart_quadratic.py [--cond 100] [--n 100] [--eps 1e-8] [--adaptive]
"""
import argparse

import numpy as np

from fgmkit.core import CompositeProblem, WholeSpace, quadratic_oracle
from fgmkit.prox import EuclideanSetup
from fgmkit.restart import predicted_total, restart_solve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--cond", type=float, default=100.0)
    ap.add_argument("--eps", type=float, default=1e-8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--adaptive", action="store_true")
    args = ap.parse_args()

    d = np.linspace(1.0, args.cond, args.n)
    xs = np.random.default_rng(args.seed).uniform(-1, 1, args.n)
    p = CompositeProblem(quadratic_oracle(np.diag(d), d * xs, 0.5 * float(d @ xs ** 2)),
                         EuclideanSetup(WholeSpace(args.n)), mu=1.0, L=args.cond)
    dist2 = float(xs @ xs)
    rep = restart_solve(p, args.eps, dist2=dist2, adaptive=args.adaptive)
    print(f"{'restart':>7} {'||c - x*||^2':>14} {'ratio':>8}")
    prev = None
    for r, c in enumerate(rep.info["centers"]):
        v = float((c - xs) @ (c - xs))
        ratio = f"{v / prev:8.4f}" if prev else " " * 8
        print(f"{r:>7d} {v:>14.6e} {ratio}")
        prev = v if v > 0 else None
    pred = predicted_total(args.cond, 1.0, 1.0, dist2, args.eps)
    print(f"gradient calls {rep.grad_calls}, predicted {pred:.0f}, ratio {rep.grad_calls / pred:.3f}")
    print(f"F - F* = {rep.F - p.value(xs):.3e}")


if __name__ == "__main__":
    main()
