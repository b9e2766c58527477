"""Entropy-regularised least squares on the simplex.

    F(x) = 1/2 ||A x - b||_2^2 + mu sum x ln x  ->  min over the simplex.

Small ``mu`` (case ``a``): entropy prox, the entropy term is absorbed by the
closed-form mirror step and each iteration costs ``O(nnz(A) + n)``.

Large ``mu`` (case ``b``): ``F`` is ``mu``-strongly convex in ``l1``; restarts
with the power-norm prox, each step solved through its two-dimensional dual.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .core import Composite, CompositeProblem, FirstOrderOracle, entropy_sum
from .fgm import fgm_solve
from .prox import EntropySetup, PowerNormSetup, _gibbs
from .report import RunReport
from .restart import restart_solve

CASES = ("a", "b")


@dataclass
class EntropyLsqProblem:
    """Problem data; ``case=None`` picks ``"a"`` iff ``mu <= eps / (2 ln n)``."""

    A: sp.spmatrix
    b: np.ndarray
    mu: float
    eps: float
    case: Optional[str] = None
    _L: Optional[float] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.A = sp.csr_matrix(self.A, dtype=float)
        self.b = np.asarray(self.b, dtype=float).ravel()
        if self.A.shape[0] != self.b.size:
            raise ValueError(f"A has {self.A.shape[0]} rows but b has length {self.b.size}")
        if self.A.shape[1] < 1:
            raise ValueError("A needs at least one column")
        if self.mu < 0 or not self.eps > 0:
            raise ValueError("need mu >= 0 and eps > 0")
        if self.case is None:
            self.case = "a" if self.mu <= self.threshold else "b"
        if self.case not in CASES:
            raise ValueError(f"case must be one of {CASES}")

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def threshold(self) -> float:
        """``eps / (2 ln n)``; infinite for ``n = 1``."""
        return self.eps / (2.0 * math.log(self.n)) if self.n > 1 else math.inf

    @property
    def L(self) -> float:
        if self._L is None:
            self._L = lipschitz_1norm(self.A)
        return self._L

    def F(self, x) -> float:
        return smooth_value_grad(self, x)[0] + self.mu * entropy_sum(x)

    def oracle(self) -> FirstOrderOracle:
        At = self.A.T.tocsr()

        def fun(x):
            r = self.A @ x - self.b
            return 0.5 * float(r @ r), At @ r

        def value(x):
            r = self.A @ x - self.b
            return 0.5 * float(r @ r)

        return FirstOrderOracle(fun, value)

    def composite_problem(self, setup) -> CompositeProblem:
        return CompositeProblem(self.oracle(), setup, Composite(entropy=self.mu), mu=self.mu,
                                L=self.L if self.L > 0 else 1.0)


def smooth_value_grad(problem: EntropyLsqProblem, x):
    """``(1/2 ||A x - b||^2, A^T (A x - b))``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.n,):
        raise ValueError(f"x must have shape ({problem.n},), got {x.shape}")
    r = problem.A @ x - problem.b
    return 0.5 * float(r @ r), problem.A.T @ r


def lipschitz_1norm(A) -> float:
    """Largest squared column norm: the gradient Lipschitz constant from ``l1`` to ``l_inf``."""
    A = sp.csc_matrix(A, dtype=float)
    if A.shape[0] == 0 or A.shape[1] == 0:
        raise ValueError("A must be non-empty")
    return float(np.asarray(A.multiply(A).sum(axis=0)).max())


def random_instance(n: int = 10, m: int = 5, mu: float = 1e-6, eps: float = 1e-6,
                    seed: int = 0, density: float = 0.6, case: Optional[str] = None
                    ) -> EntropyLsqProblem:
    """Seeded sparse Gaussian instance with ``b`` the image of a random simplex point plus noise."""
    rng = np.random.default_rng(seed)
    A = sp.random(m, n, density=density, random_state=rng, data_rvs=rng.standard_normal,
                  format="csr")
    b = A @ rng.dirichlet(np.ones(n)) + rng.standard_normal(m)
    return EntropyLsqProblem(A, b, mu, eps, case)


def solve_case_a(problem: EntropyLsqProblem, max_iter: int = 1_000_000) -> RunReport:
    """Fast gradient method with entropy prox; stops on the certificate gap."""
    if problem.case != "a":
        raise ValueError("solve_case_a needs a case-a problem")
    cp = problem.composite_problem(EntropySetup(problem.n))
    rep = fgm_solve(cp, problem.eps, max_iter=max_iter)
    rep.info["problem"] = cp
    return rep


def solve_case_b(problem: EntropyLsqProblem, *, adaptive: bool = True,
                 eps_inner: Optional[float] = None, dist2: Optional[float] = None) -> RunReport:
    """Restarted fast gradient method with the power-norm prox (needs ``n >= 3``).

    ``eps_inner`` defaults to ``min(1e-10, eps / 100)``.  ``info["inner_solves"]``
    counts inner subproblems, the records carry cumulative inner iterations.
    """
    if problem.case != "b":
        raise ValueError("solve_case_b needs a case-b problem")
    if not problem.mu > 0:
        raise ValueError("case b needs mu > 0")
    eps_inner = min(1e-10, problem.eps / 100.0) if eps_inner is None else eps_inner
    setup = PowerNormSetup(problem.n, eps_inner=eps_inner)
    cp = problem.composite_problem(setup)
    rep = restart_solve(cp, problem.eps, adaptive=adaptive, dist2=dist2)
    rep.info.update(problem=cp, inner_solves=setup.inner_solves,
                    inner_iterations=setup.inner_iterations)
    return rep


def predicted_outer_iterations(problem: EntropyLsqProblem, omega: Optional[float] = None) -> float:
    """``sqrt(L omega / mu) * ceil(ln(mu / eps))`` with ``omega = 2 ln n`` by default."""
    omega = 2.0 * math.log(problem.n) if omega is None else omega
    return math.sqrt(problem.L * omega / problem.mu) * max(1, math.ceil(math.log(problem.mu / problem.eps)))


def mirror_descent_reference(problem: EntropyLsqProblem, iterations: int = 100_000,
                             x0=None) -> np.ndarray:
    """Non-accelerated entropic proximal gradient with step ``1 / L``.

    Plain loop independent of the solver engine, used as a long-run reference.
    """
    A, b, mu = problem.A.toarray(), problem.b, problem.mu
    L = problem.L if problem.L > 0 else 1.0
    x = np.full(problem.n, 1.0 / problem.n) if x0 is None else np.asarray(x0, dtype=float)
    AtA, Atb = A.T @ A, A.T @ b
    for _ in range(iterations):
        g = AtA @ x - Atb
        x = _gibbs((np.log(np.maximum(x, 1e-300)) - g / L) / (1.0 + mu / L))
    return x
