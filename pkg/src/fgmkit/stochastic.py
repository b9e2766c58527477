"""Stochastic gradients with mini-batch averaging.

Averaging ``m`` independent draws divides the variance by ``m``.  With
``m_{k+1} = max(1, ceil(2 alpha_{k+1} D / eps))`` the accumulated noise term
of the fast gradient method stays below ``eps / 2``, so the iteration count
of the deterministic method is kept and only the sample count grows.
"""
from __future__ import annotations

import math
import threading
from typing import Callable, Optional, Union

import numpy as np

from .core import CompositeProblem
from .fgm import _alpha_from_A, fgm_solve, theoretical_iterations
from .report import RunReport


class StochasticOracle:
    """Unbiased stochastic gradient ``g(x; xi)`` with variance bound ``D``.

    Parameters
    ----------
    sample : callable
        ``sample(x, rng) -> gradient``; must draw its randomness from ``rng`` only.
    D : float or callable
        Bound on ``E ||g(x; xi) - grad f(x)||_*^2``, constant or ``D(x)``.
    """

    def __init__(self, sample: Callable, D: Union[float, Callable]):
        if not callable(D) and D < 0:
            raise ValueError("D must be non-negative")
        self._sample = sample
        self.D = D
        self.sample_calls = 0
        self._lock = threading.Lock()

    def variance(self, x) -> float:
        return float(self.D(x)) if callable(self.D) else float(self.D)

    def __call__(self, x, rng) -> np.ndarray:
        g = np.asarray(self._sample(x, rng), dtype=float)
        with self._lock:
            self.sample_calls += 1
        return g


def batched_gradient(oracle: StochasticOracle, x, m: int, rng):
    """Mean of ``m`` independent draws and their empirical variance.

    Draws are made and summed in a fixed order so the result depends only on
    the state of ``rng``.  The variance is the unbiased estimate of
    ``E ||g - E g||_2^2`` (0 for ``m = 1``).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    draws = np.stack([oracle(x, rng) for _ in range(int(m))])
    mean = draws.mean(axis=0)
    if m == 1:
        return draws[0], 0.0
    var = float(np.sum((draws - mean) ** 2) / (m - 1))
    return mean, var


def batch_size(alpha_next: float, D: float, eps: float) -> int:
    """``max(1, ceil(2 alpha D / eps))``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    return max(1, math.ceil(2.0 * alpha_next * D / eps - 1e-12))


def predicted_sample_budget(L: float, R2: float, D: float, eps: float,
                            num_iterations: Optional[int] = None) -> int:
    """Samples used by :func:`stochastic_fgm_solve` with constant ``D``.

    Equals ``N + O(D R^2 / eps^2)`` with ``N`` the deterministic count.
    """
    N = num_iterations or theoretical_iterations(L, R2, eps / 2.0)
    A, total = 0.0, 0
    for _ in range(N):
        a = _alpha_from_A(L, A)
        A += a
        total += batch_size(a, D, eps)
    return total


def stochastic_fgm_solve(problem: CompositeProblem, oracle: StochasticOracle, eps: float,
                         rng=None, *, L: Optional[float] = None, R2: Optional[float] = None,
                         num_iterations: Optional[int] = None,
                         max_samples: Optional[int] = None) -> RunReport:
    """Fast gradient method driven by batched stochastic gradients.

    Runs the deterministic iteration count for accuracy ``eps / 2``; the batch
    rule covers the other half.  ``problem.smooth`` is used only to report
    ``F(y^k)``.  ``info["samples"]`` is the total number of draws and
    ``info["batch_sizes"]`` the per-iteration ``m``.
    """
    rng = np.random.default_rng(rng)
    L = L if L is not None else problem.known_L()
    if L is None:
        raise ValueError("stochastic solver needs L")
    R2 = problem.prox.R2_bound if R2 is None else R2
    N = num_iterations or theoretical_iterations(L, R2, eps / 2.0)
    batches: list[int] = []
    used = [0]

    def draw(x, alpha):
        m = batch_size(alpha, oracle.variance(x), eps)
        if max_samples is not None:
            m = max(1, min(m, max_samples - used[0]))
        g, _ = batched_gradient(oracle, x, m, rng)
        batches.append(m)
        used[0] += m
        return math.nan, g, 0.0, m

    rep = fgm_solve(problem, eps, L=L, stop_rule="iterations", num_iterations=N, R2=R2,
                    cert_every=N + 1, oracle=draw, max_iter=N)
    rep.info.update(samples=int(sum(batches)), batch_sizes=batches, iterations=N)
    return rep
