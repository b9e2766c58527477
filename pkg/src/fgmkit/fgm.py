"""Composite fast gradient method in linear-coupling form.

One iteration (``k -> k + 1``)::

    x = tau_k z + (1 - tau_k) y                      # coupling
    y = argmin f(x) + <g, u - x> + L V(u, x) + h(u)  # gradient step
    z = argmin <g, u - z> + V(u, z) / alpha + h(u)   # mirror step

with ``g = grad f(x)``, ``A_{k+1} = A_k + alpha_{k+1} = L alpha_{k+1}^2`` and
``tau_k = alpha_{k+1} / A_{k+1}``.  The weighted affine minorants of ``f``
collected at the points ``x`` give a lower bound on ``F_*``, which is what the
default stopping rule uses.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .core import CompositeProblem, call_oracle
from .prox import grad_step, mirror_step
from .report import IterRecord, RunReport

STOP_RULES = ("gap", "iterations", "gradmap", "budget")


def _alpha_from_A(L: float, A: float) -> float:
    """Positive root of ``L a^2 - a - A = 0``."""
    h = 0.5 / L
    return h + math.sqrt(h * h + A / L)


def next_alpha_tau(L_next: float, alpha_k: float, L_k: Optional[float] = None):
    """Step coefficients ``(alpha_{k+1}, tau_k)``.

    ``alpha_k = 0`` produces ``alpha_1 = 1 / L``.  With ``L_k`` given this is
    the adaptive recurrence; ``L_k = L_next`` reduces it to the constant one.
    """
    if not L_next > 0:
        raise ValueError("L_next must be positive")
    if L_k is None:
        L_k = L_next
    alpha = _alpha_from_A(L_next, alpha_k * alpha_k * L_k)
    return alpha, min(1.0, 1.0 / (alpha * L_next))


@dataclass
class FgmState:
    k: int
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    alpha: float
    A: float
    L: float
    center: np.ndarray
    grad_sum: np.ndarray      # sum alpha_i grad f(x^i)
    const_sum: float          # sum alpha_i (f(x^i) - <grad f(x^i), x^i>)
    F_y: float = math.nan
    f_y: float = math.nan
    delta_sum: float = 0.0    # sum A_i delta_i
    samples: int = 0

    @classmethod
    def initial(cls, x0, L0: float) -> "FgmState":
        x0 = np.array(x0, dtype=float)
        return cls(0, x0.copy(), x0.copy(), x0.copy(), 0.0, 0.0, float(L0), x0.copy(),
                   np.zeros_like(x0), 0.0)

    def absorb(self, x, fx, g, alpha) -> tuple:
        return self.grad_sum + alpha * g, self.const_sum + alpha * (fx - float(g @ x))


def fgm_step(state: FgmState, problem: CompositeProblem, L: Optional[float] = None,
             oracle: Optional[Callable] = None) -> FgmState:
    """One constant-``L`` iteration; exactly one oracle call.

    ``oracle(x, alpha_next) -> (f, g, delta, samples)`` replaces the problem's
    oracle (used by the mini-batch solver).
    """
    if L is None:
        L = problem.known_L() or state.L
    setup, h = problem.prox, problem.composite
    alpha = _alpha_from_A(L, state.A)
    A = state.A + alpha
    tau = alpha / A
    x = tau * state.z + (1.0 - tau) * state.y
    if oracle is None:
        fx, g, delta = call_oracle(problem.smooth, x)
        samples = 0
    else:
        fx, g, delta, samples = oracle(x, alpha)
    y = grad_step(setup, x, g, fx, L, h)
    z = mirror_step(setup, state.z, g, alpha, h)
    gs, cs = state.absorb(x, fx, g, alpha)
    return replace(state, k=state.k + 1, x=x, y=y, z=z, alpha=alpha, A=A, L=L,
                   grad_sum=gs, const_sum=cs, F_y=math.nan, f_y=math.nan,
                   delta_sum=state.delta_sum + A * delta, samples=state.samples + samples)


@dataclass
class Certificate:
    primal: float        # F(y^N)
    dual: float          # lower bound on F_*
    gap: float           # primal - dual >= F(y^N) - F_*
    model_value: float   # psi_N / A_N, satisfies F(y^N) <= model_value for exact oracles


def dual_certificate(state: FgmState, problem: CompositeProblem, R2: Optional[float] = None,
                     F_y: Optional[float] = None) -> Certificate:
    """Primal-dual certificate from the aggregated affine model.

    ``psi = min_x sum alpha_i [f(x^i) + <g_i, x - x^i> + h(x)] + V(x, x^0)``.
    Since the affine terms minorise ``f``, ``psi <= A F_* + V(x_*, x^0)``, so
    ``(psi - R2) / A`` is a lower bound on ``F_*`` whenever ``R2`` bounds
    ``V(., x^0)`` on the feasible set.  When the model without the Bregman
    term has a bounded minimum it is a second lower bound; the larger is used.
    """
    setup, h = problem.prox, problem.composite
    if F_y is None:
        F_y = state.F_y if not math.isnan(state.F_y) else problem.value(state.y)
    A = state.A
    if A <= 0:
        return Certificate(F_y, -math.inf, math.inf, math.inf)
    if R2 is None:
        R2 = setup.R2_bound if np.array_equal(state.center, setup.center) \
            else setup.recentred(state.center).R2_bound
    G, K = state.grad_sum, state.const_sum
    xm = setup.step(state.center, G / A, A, h)
    psi = float(G @ xm) + K + A * problem.h(xm) + setup.bregman(xm, state.center)
    lower = (psi - R2) / A if math.isfinite(R2) else -math.inf
    try:
        xp = setup.step(state.center, G / A, math.inf, h)
        lower = max(lower, (float(G @ xp) + K) / A + problem.h(xp))
    except (ValueError, NotImplementedError):
        pass
    return Certificate(F_y, lower, F_y - lower, psi / A)


def theoretical_iterations(L: float, R2: float, eps: float) -> int:
    """Smallest ``N`` with ``4 L R2 / (N + 1)^2 <= eps``."""
    return max(1, math.ceil(2.0 * math.sqrt(L * R2 / eps) - 1.0 - 1e-12))


def fgm_solve(problem: CompositeProblem, eps: float, max_oracle_calls: Optional[int] = None, *,
              L: Optional[float] = None, adaptive: bool = False, stop_rule: str = "gap",
              max_iter: int = 100_000, x0=None, L0: float = 1.0, delta_rule: str = "precise",
              R2: Optional[float] = None, cert_every: int = 1, restart: int = 0,
              oracle: Optional[Callable] = None, L_max: float = 1e30,
              num_iterations: Optional[int] = None) -> RunReport:
    """Run the method until the stopping rule fires.

    Parameters
    ----------
    eps : target accuracy for the ``"gap"`` and ``"gradmap"`` rules and for the
        theoretical count of the ``"iterations"`` rule.
    max_oracle_calls : gradient-call budget; exceeding it ends the run with
        status ``"budget_exhausted"``.
    adaptive : use backtracking on ``L`` (see :mod:`fgmkit.universal`),
        starting from ``L0``.
    num_iterations : overrides the theoretical count of the ``"iterations"`` rule.
    """
    if stop_rule not in STOP_RULES:
        raise ValueError(f"unknown stop rule {stop_rule!r}")
    if not eps > 0:
        raise ValueError("eps must be positive")
    setup = problem.prox
    smooth = problem.smooth
    if x0 is None:
        x0 = setup.center
    if not adaptive:
        L = L if L is not None else problem.known_L()
        if L is None:
            raise ValueError("constant-L mode needs L (or pass adaptive=True)")
    if R2 is None:
        R2 = setup.R2_bound if np.array_equal(np.asarray(x0), setup.center) \
            else setup.recentred(x0).R2_bound
    n_target = None
    if stop_rule == "iterations":
        if num_iterations is not None:
            n_target = int(num_iterations)
        elif adaptive or not math.isfinite(R2):
            raise ValueError("'iterations' rule needs constant L and a finite R2")
        else:
            n_target = theoretical_iterations(L, R2, eps)

    g0, f0 = smooth.grad_calls, smooth.fval_calls
    t0 = time.perf_counter()
    inner0 = getattr(setup, "inner_iterations", 0)
    state = FgmState.initial(x0, L if not adaptive else L0)
    F0 = problem.value(state.y)
    state.F_y = F0
    rep = RunReport()
    rep.records.append(IterRecord(0, smooth.grad_calls - g0, smooth.fval_calls - f0, 0, F0,
                                  math.inf, state.L, restart, 0, 0.0))
    rep.x_best, rep.F_best = state.y.copy(), F0
    status = "budget_exhausted"
    if adaptive:
        from .universal import adaptive_step
    if stop_rule == "gradmap":
        from .restart import grad_mapping_norm

    for _ in range(max_iter):
        if adaptive:
            state = adaptive_step(state, problem, eps, delta_rule=delta_rule, L_max=L_max)
        else:
            state = fgm_step(state, problem, L, oracle)
            state.F_y = problem.value(state.y)
        gap = math.nan
        stop = False
        if stop_rule == "gap" or state.k % cert_every == 0:
            gap = dual_certificate(state, problem, R2).gap
            stop = stop_rule == "gap" and gap <= eps
        if stop_rule == "iterations" and state.k >= n_target:
            stop = True
        if stop_rule == "gradmap":
            stop = grad_mapping_norm(problem, state.y, state.L) <= eps
        if state.F_y < rep.F_best:
            rep.x_best, rep.F_best = state.y.copy(), state.F_y
        rep.records.append(IterRecord(
            state.k, smooth.grad_calls - g0, smooth.fval_calls - f0, state.samples,
            state.F_y, gap, state.L, restart,
            getattr(setup, "inner_iterations", 0) - inner0,
            1e3 * (time.perf_counter() - t0)))
        if stop:
            status = "converged"
            break
        if max_oracle_calls is not None and smooth.grad_calls - g0 >= max_oracle_calls:
            break
    rep.status = status
    rep.x = state.y.copy()
    rep.info.update(A=state.A, R2=R2, L=state.L, state=state,
                    delta_term=state.delta_sum / state.A if state.A > 0 else 0.0)
    if n_target is not None:
        rep.info["theoretical_iterations"] = n_target
    return rep
