"""Fast invariant checks runnable without the test suite (``fgmkit selftest``)."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .core import (Box, CompositeProblem, holder_power_oracle, quadratic_oracle, verify_dl_oracle,
                   wrap_holder_as_inexact)
from .entropy_lsq import lipschitz_1norm, random_instance, smooth_value_grad
from .fgm import fgm_solve
from .inner import InnerSubproblem, slater_C, solve_inner
from .prox import EntropySetup, EuclideanSetup, PowerNormSetup
from .stochastic import batch_size
from .universal import universal_solve


def _pinsker_and_omega() -> tuple[bool, str]:
    rng = np.random.default_rng(0)
    worst_p, worst_o = math.inf, 0.0
    for setup in (EntropySetup(10), PowerNormSetup(10)):
        for _ in range(500):
            x, y = rng.dirichlet(np.ones(10)), rng.dirichlet(np.ones(10))
            d1 = np.abs(x - y).sum()
            worst_p = min(worst_p, setup.bregman(x, y) - 0.5 * d1 ** 2)
            c = setup.center
            worst_o = max(worst_o, 2 * setup.bregman(x, c) - setup.omega_n * np.abs(x - c).sum() ** 2)
    return worst_p >= -1e-12 and worst_o <= 1e-12, f"pinsker slack {worst_p:.2e}, omega excess {worst_o:.2e}"


def _oracle_contract() -> tuple[bool, str]:
    o, hc = holder_power_oracle(0.5, 1.0)
    inex = wrap_holder_as_inexact(o, hc, 1e-3)
    rep = verify_dl_oracle(inex, o.value, lambda r: r.uniform(-1, 1, 3), 300, rng=1)
    return rep.ok(1e-9), f"lower {rep.max_lower_violation:.2e}, upper {rep.max_upper_violation:.2e}"


def _fgm_rate() -> tuple[bool, str]:
    n = 20
    xs = np.random.default_rng(2).uniform(-2, 2, n)
    setup = EuclideanSetup(Box(-np.ones(n), np.ones(n)))
    p = CompositeProblem(quadratic_oracle(np.eye(n), xs, 0.5 * xs @ xs), setup, L=1.0)
    rep = fgm_solve(p, 1e-12, stop_rule="iterations", num_iterations=100)
    xo = np.clip(xs, -1, 1)
    Fs = 0.5 * float((xo - xs) @ (xo - xs))
    R2 = 0.5 * float(xo @ xo)
    N = np.arange(rep.iterations + 1)
    excess = float(np.max(rep.column("F") - Fs - 4 * R2 / (N + 1) ** 2))
    return excess <= 1e-9, f"max excess over envelope {excess:.2e}"


def _universal_economy() -> tuple[bool, str]:
    o, _ = holder_power_oracle(0.0, 0.1, np.array([0.2, -0.3]))
    p = CompositeProblem(o, EuclideanSetup(Box(-np.ones(2), np.ones(2))))
    rep = universal_solve(p, 1e-3)
    r = rep.evals_per_iteration()
    return rep.iterations >= 50 and r <= 4.5, f"{rep.iterations} iterations, {r:.3f} evals/iteration"


def _inner_solver() -> tuple[bool, str]:
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(3):
        sub = InnerSubproblem(rng.standard_normal(5), 0.1, PowerNormSetup(5).params.a)
        sol = solve_inner(sub, 1e-9)
        worst = max(worst, abs(sol.x.sum() - 1.0))
        if not sol.gap <= 1e-6 or abs(sol.lam.lambda1) + abs(sol.lam.lambda2) > slater_C(sub):
            return False, f"gap {sol.gap:.2e}"
    return worst <= 1e-12, f"simplex residual {worst:.2e}"


def _lsq_kernel() -> tuple[bool, str]:
    P = random_instance(10, 5, 0.0, 1e-3, seed=4)
    rng = np.random.default_rng(4)
    L = lipschitz_1norm(P.A)
    worst = -math.inf
    for _ in range(300):
        x, y = rng.dirichlet(np.ones(10)), rng.dirichlet(np.ones(10))
        fx, g = smooth_value_grad(P, x)
        fy, _ = smooth_value_grad(P, y)
        worst = max(worst, fy - fx - g @ (y - x) - 0.5 * L * np.abs(y - x).sum() ** 2)
    return worst <= 1e-12, f"max l1 smoothness excess {worst:.2e}"


def _batch_rule() -> tuple[bool, str]:
    ok = batch_size(2, 5, 1) == 20 and batch_size(1, 0, 1) == 1 and batch_size(0.3, 1, 0.1) == 6
    return ok, "batch sizes 20, 1, 6"


CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "prox: Pinsker and omega bounds": _pinsker_and_omega,
    "core: Hoelder (delta, L) contract": _oracle_contract,
    "fgm: rate envelope": _fgm_rate,
    "universal: evaluations per iteration": _universal_economy,
    "inner: dual solver": _inner_solver,
    "entropy_lsq: l1 smoothness constant": _lsq_kernel,
    "stochastic: batch rule": _batch_rule,
}


def run_selftest(out=print) -> bool:
    all_ok = True
    for name, check in CHECKS.items():
        try:
            ok, detail = check()
        except Exception as exc:  # report and continue
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
        all_ok &= ok
    return all_ok
