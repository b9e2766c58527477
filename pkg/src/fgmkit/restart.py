"""Restarts for strongly convex composites and the regularization reduction.

If ``F`` is ``mu``-strongly convex and ``V(x, c) <= omega / 2 ||x - c||^2``,
then ``N = ceil(sqrt(8 L omega / mu))`` iterations halve ``||y - x_*||^2``.
Re-centring the prox at ``y`` and repeating ``k = ceil(log2(mu R^2 / eps))``
times gives ``F(y) - F_* <= eps`` with about ``N k`` gradient calls.
"""
from __future__ import annotations

import math
from dataclasses import replace
from typing import Optional

import numpy as np

from .core import CompositeProblem, call_oracle
from .fgm import fgm_solve
from .prox import grad_step
from .report import RunReport


def restart_length(L: float, mu: float, omega_n: float) -> int:
    """``ceil(sqrt(8 L omega_n / mu))``."""
    if not mu > 0:
        raise ValueError("mu must be positive")
    if not (L > 0 and omega_n > 0):
        raise ValueError("L and omega_n must be positive")
    return max(1, math.ceil(math.sqrt(8.0 * L * omega_n / mu) - 1e-12))


def restart_count(mu: float, R2: float, eps: float) -> int:
    """``max(1, ceil(log2(mu R2 / eps)))``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    r = mu * R2 / eps
    if r <= 1.0:
        return 1
    return max(1, math.ceil(math.log2(r) - 1e-12))


def predicted_total(L: float, mu: float, omega_n: float, R2: float, eps: float) -> float:
    """Total iteration count ``sqrt(8 L omega / mu) * ceil(log2(mu R2 / eps))``."""
    return math.sqrt(8.0 * L * omega_n / mu) * restart_count(mu, R2, eps)


def grad_mapping_norm(problem: CompositeProblem, x, L: float) -> float:
    """``L ||x - Grad_L(x)||`` in the setup norm (one gradient call)."""
    fx, g, _ = call_oracle(problem.smooth, np.asarray(x, dtype=float))
    y = grad_step(problem.prox, x, g, fx, L, problem.composite)
    return L * problem.prox.norm(np.asarray(x, dtype=float) - y)


def regularize(problem: CompositeProblem, eps: float, R2: float, x0=None) -> CompositeProblem:
    """``F + gamma V(., x0)`` with ``gamma = eps / (2 R2)``, declared ``gamma``-strongly convex."""
    if not (eps > 0 and R2 > 0):
        raise ValueError("eps and R2 must be positive")
    h = problem.composite
    if h.is_custom or h.breg_weight:
        raise ValueError("cannot add a Bregman term to this composite")
    gamma = eps / (2.0 * R2)
    c = problem.prox.center if x0 is None else np.asarray(x0, dtype=float)
    return replace(problem, composite=replace(h, breg_weight=gamma, breg_center=c.copy()),
                   mu=problem.mu + gamma)


def restart_solve(problem: CompositeProblem, eps: float, *, L: Optional[float] = None,
                  adaptive: bool = False, dist2: Optional[float] = None,
                  omega: Optional[float] = None, x0=None, L0: float = 1.0,
                  max_restarts: Optional[int] = None) -> RunReport:
    """Restarted fast gradient method.

    Parameters
    ----------
    dist2 : bound on ``||x0 - x_*||^2`` in the setup norm; defaults to the
        setup's diameter bound.
    omega : constant in ``V(x, c) <= omega / 2 ||x - c||^2``; defaults to the
        setup's ``omega_n``.
    adaptive : backtrack on ``L``; each segment's length uses the largest
        ``L`` accepted in the previous one (the first uses one probe step).

    ``info["centers"]`` holds the prox centre of every segment and the final
    point, ``info["segment_length"]`` the per-segment iteration counts.
    """
    mu = problem.mu
    if not mu > 0:
        raise ValueError("restarts need mu > 0")
    setup, smooth = problem.prox, problem.smooth
    omega = setup.omega_n if omega is None else float(omega)
    dist2 = setup.dist2_bound if dist2 is None else float(dist2)
    if not math.isfinite(dist2):
        raise ValueError("pass dist2 for unbounded feasible sets")
    k = restart_count(mu, dist2, eps)
    if max_restarts is not None:
        k = min(k, max_restarts)
    if not adaptive:
        L = L if L is not None else problem.known_L()
        if L is None:
            raise ValueError("constant-L restarts need L (or adaptive=True)")
        L_seg = L
    else:
        from .universal import backtrack
        c = setup.center if x0 is None else np.asarray(x0, dtype=float)
        L_seg = backtrack(problem, c, 2.0 * L0).L

    g0, f0 = smooth.grad_calls, smooth.fval_calls
    center = (setup.center if x0 is None else np.asarray(x0, dtype=float)).copy()
    out = RunReport()
    centers, lengths = [center.copy()], []
    offset_iter = 0
    for r in range(k):
        N = restart_length(L_seg, mu, omega)
        seg = fgm_solve(problem, eps, L=None if adaptive else L, adaptive=adaptive,
                        L0=L_seg, stop_rule="iterations", num_iterations=N, x0=center,
                        cert_every=N, restart=r, max_iter=N)
        recs = seg.records if r == 0 else seg.records[1:]
        for rec in recs:
            out.records.append(replace(rec, iter=rec.iter + offset_iter,
                                       grad_calls=smooth.grad_calls - g0 - (seg.grad_calls - rec.grad_calls),
                                       fval_calls=smooth.fval_calls - f0 - (seg.fval_calls - rec.fval_calls)))
        offset_iter += seg.iterations
        if seg.F_best < out.F_best:
            out.x_best, out.F_best = seg.x_best, seg.F_best
        center = seg.x.copy()
        centers.append(center.copy())
        lengths.append(N)
        if adaptive:
            L_seg = float(np.max(seg.column("L_k")[1:]))
    out.x = center
    out.status = "converged"
    out.info.update(centers=centers, segment_length=lengths, restarts=k, omega=omega,
                    dist2=dist2, predicted=predicted_total(L_seg, mu, omega, dist2, eps))
    return out
