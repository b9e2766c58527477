"""Benchmark problem families and rate fitting."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import Box, CompositeProblem, FirstOrderOracle, quadratic_oracle
from .prox import EuclideanSetup
from .universal import universal_solve

DEFAULT_EPS = (1e-1, 1e-2, 1e-3, 1e-4)


@dataclass
class LogLogFit:
    slope: float
    intercept: float
    r2: float


def fit_loglog(eps: Sequence[float], counts: Sequence[float]) -> LogLogFit:
    """Least squares of ``ln N`` on ``ln(1 / eps)`` with the coefficient of determination."""
    x = np.log(1.0 / np.asarray(eps, dtype=float))
    y = np.log(np.asarray(counts, dtype=float))
    slope, icpt = np.polyfit(x, y, 1)
    res = y - (slope * x + icpt)
    tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(res @ res) / tot if tot > 0 else 1.0
    return LogLogFit(float(slope), float(icpt), r2)


def piecewise_linear_problem(n: int = 2, scale: float = 0.05, seed: int = 0) -> CompositeProblem:
    """``scale * ||x - x_*||_1`` on ``[-1, 1]^n`` (gradient Hölder with ``nu = 0``), ``F_* = 0``."""
    xs = np.random.default_rng(seed).uniform(-0.5, 0.5, n)

    def fun(x):
        d = x - xs
        return scale * float(np.abs(d).sum()), scale * np.sign(d)

    return CompositeProblem(FirstOrderOracle(fun), EuclideanSetup(Box(-np.ones(n), np.ones(n))))


def quadratic_problem(n: int = 5, cond: float = 10.0, seed: int = 0) -> CompositeProblem:
    """``1/2 (x - x_*)^T Q (x - x_*)`` on ``[-1, 1]^n`` with interior ``x_*``, ``F_* = 0``."""
    xs = np.random.default_rng(seed).uniform(-0.5, 0.5, n)
    Q = np.diag(np.linspace(1.0, cond, n))
    return CompositeProblem(quadratic_oracle(Q, Q @ xs, 0.5 * xs @ Q @ xs),
                            EuclideanSetup(Box(-np.ones(n), np.ones(n))), L=cond)


UNIVERSAL_SUITE: dict[str, Callable[[], CompositeProblem]] = {
    "nu=0": piecewise_linear_problem,
    "nu=1": quadratic_problem,
}


@dataclass
class SweepRow:
    eps: float
    iterations: int
    grad_calls: int
    fval_calls: int
    status: str
    F: float


def sweep(make: Callable[[], CompositeProblem], eps_list: Sequence[float] = DEFAULT_EPS,
          max_iter: int = 1_000_000, **kw) -> tuple[list[SweepRow], LogLogFit]:
    """Universal method on a fresh problem per ``eps``; fit of iterations against ``1 / eps``."""
    rows = []
    for eps in eps_list:
        rep = universal_solve(make(), eps, max_iter=max_iter, **kw)
        rows.append(SweepRow(eps, rep.iterations, rep.grad_calls, rep.fval_calls, rep.status, rep.F))
    fit = fit_loglog([r.eps for r in rows], [max(r.iterations, 1) for r in rows])
    return rows, fit


def format_sweep(name: str, rows: Sequence[SweepRow], fit: LogLogFit) -> str:
    lines = [f"# suite {name}", f"{'eps':>10} {'N':>9} {'grad':>9} {'fval':>9} {'evals/it':>9} status"]
    for r in rows:
        per = (r.grad_calls + r.fval_calls) / r.iterations if r.iterations else math.nan
        lines.append(f"{r.eps:>10.1e} {r.iterations:>9d} {r.grad_calls:>9d} {r.fval_calls:>9d} "
                     f"{per:>9.3f} {r.status}")
    lines.append(f"slope {fit.slope:.4f}  R2 {fit.r2:.4f}")
    return "\n".join(lines)
