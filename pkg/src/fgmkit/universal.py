"""Universal (backtracking) variant of the fast gradient method.

Each iteration halves the previous ``L`` and doubles it until the gradient
step ``y`` satisfies the inexact descent condition

    f(y) <= f(x) + <grad f(x), y - x> + L V(y, x) + delta.

No Hölder constants are needed.  ``delta`` is ``eps alpha / (2 A)``
(``"precise"``) or ``eps^1.5 / (2 sqrt(L))`` (``"coarse"``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .core import CompositeProblem, call_oracle
from .fgm import FgmState, _alpha_from_A, fgm_solve
from .prox import mirror_step
from .report import RunReport

DELTA_RULES = ("precise", "coarse")
_ROUNDOFF = 8 * np.finfo(float).eps


class BacktrackError(RuntimeError):
    """Raised when ``L`` exceeds its ceiling during backtracking."""


@dataclass
class BacktrackResult:
    L: float
    x: np.ndarray
    y: np.ndarray
    f_x: float
    grad: np.ndarray
    f_y: float
    fval_calls: int
    trials: int


def backtrack(problem: CompositeProblem, x_next: Union[np.ndarray, Callable],
              L_start: float, delta: Union[float, Callable] = 0.0, *,
              L_max: float = 1e30) -> BacktrackResult:
    """Find ``L`` (starting from ``L_start / 2``, doubling) accepted by the descent test.

    ``x_next`` may be a fixed point or a function ``L -> x``; in the latter
    case the gradient is recomputed at every trial.  ``delta`` may likewise
    depend on ``L``.
    """
    setup, h, smooth = problem.prox, problem.composite, problem.smooth
    fixed = not callable(x_next)
    L = 0.5 * float(L_start)
    if fixed:
        x = np.asarray(x_next, dtype=float)
        fx, g, _ = call_oracle(smooth, x)
    fcalls = trials = 0
    while True:
        if L > L_max:
            raise BacktrackError(f"L exceeded {L_max:g} during backtracking")
        trials += 1
        if not fixed:
            x = np.asarray(x_next(L), dtype=float)
            fx, g, _ = call_oracle(smooth, x)
        y = setup.step(x, g, 1.0 / L, h)
        fy = smooth.value(y)
        fcalls += 1
        d = delta(L) if callable(delta) else float(delta)
        model = fx + float(g @ (y - x)) + L * setup.bregman(y, x)
        if fy <= model + d + _ROUNDOFF * (abs(fx) + abs(model)):
            return BacktrackResult(L, x, y, fx, g, fy, fcalls, trials)
        L *= 2.0


def inexactness(rule: str, eps: float, L: float, A_prev: float) -> float:
    if rule == "precise":
        alpha = _alpha_from_A(L, A_prev)
        return eps * alpha / (2.0 * (A_prev + alpha))
    if rule == "coarse":
        return eps ** 1.5 / (2.0 * math.sqrt(L))
    raise ValueError(f"unknown delta rule {rule!r}")


def adaptive_step(state: FgmState, problem: CompositeProblem, eps: float, *,
                  delta_rule: str = "precise", L_max: float = 1e30) -> FgmState:
    """One backtracking iteration; ``state.F_y`` is filled in."""
    setup, h = problem.prox, problem.composite

    def x_of(L):
        alpha = _alpha_from_A(L, state.A)
        tau = alpha / (state.A + alpha)
        return tau * state.z + (1.0 - tau) * state.y

    res = backtrack(problem, x_of, state.L,
                    lambda L: inexactness(delta_rule, eps, L, state.A), L_max=L_max)
    L = res.L
    alpha = _alpha_from_A(L, state.A)
    A = state.A + alpha
    z = mirror_step(setup, state.z, res.grad, alpha, h)
    gs, cs = state.absorb(res.x, res.f_x, res.grad, alpha)
    d = inexactness(delta_rule, eps, L, state.A)
    return FgmState(state.k + 1, res.x, res.y, z, alpha, A, L, state.center, gs, cs,
                    F_y=res.f_y + problem.h(res.y), f_y=res.f_y,
                    delta_sum=state.delta_sum + A * d, samples=state.samples)


def universal_solve(problem: CompositeProblem, eps: float, max_oracle_calls: Optional[int] = None,
                    *, L0: float = 1.0, delta_rule: str = "precise", stop_rule: str = "gap",
                    max_iter: int = 100_000, **kw) -> RunReport:
    """Backtracking fast gradient method; see :func:`fgmkit.fgm.fgm_solve`."""
    if delta_rule not in DELTA_RULES:
        raise ValueError(f"unknown delta rule {delta_rule!r}")
    return fgm_solve(problem, eps, max_oracle_calls, adaptive=True, L0=L0,
                     delta_rule=delta_rule, stop_rule=stop_rule, max_iter=max_iter, **kw)
