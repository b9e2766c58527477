"""Subproblem ``<c, x> + ||x||_a^2 + mubar * sum x ln x -> min`` over the simplex.

Solved through its two-dimensional Lagrange dual.  Writing
``||x||_a^2 <= t`` as ``sum x^a <= t^(a/2)`` and dualising both the simplex
equality (``lam1``) and this constraint (``lam2 >= 0``) makes the inner
minimisation separable: ``t`` has a closed form and each ``x_k`` solves a
strictly convex scalar problem on ``[0, 1]``, found by bisection.  The dual is
maximised by a 2-D ellipsoid method over the box ``|lam1| + lam2 <= C``; the
primal point is the renormalised inner minimiser at the best multiplier.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numba import njit

# bisection runs in u = ln x; exp(-745) is the smallest positive double
U_MIN = -745.0
# delta-gradient slack is DELTA_KAPPA * C * sigma
DELTA_KAPPA = 6.0


@dataclass(frozen=True)
class InnerSubproblem:
    c: np.ndarray
    mu_bar: float
    a: float

    def __post_init__(self):
        c = np.ascontiguousarray(self.c, dtype=float)
        object.__setattr__(self, "c", c)
        if not 1.0 < self.a < 2.0:
            raise ValueError(f"a must lie in (1, 2), got {self.a}")
        if self.mu_bar < 0:
            raise ValueError("mu_bar must be non-negative")

    @property
    def n(self) -> int:
        return self.c.size

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        pos = x > 0
        ent = float(np.sum(x[pos] * np.log(x[pos])))
        return float(self.c @ x) + float(np.sum(x**self.a)) ** (2.0 / self.a) + self.mu_bar * ent


@dataclass(frozen=True)
class DualPoint:
    lambda1: float
    lambda2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.lambda1, self.lambda2])


@njit(cache=True)
def _coordinate_minimizers(c, lam1, lam2, a, mu_bar, tol):  # pragma: no cover - jitted
    n = c.shape[0]
    x = np.empty(n)
    for k in range(n):
        ck = c[k] + lam1
        # derivative of ck x + lam2 x^a + mu_bar x ln x at x = 1
        if ck + lam2 * a + mu_bar <= 0.0:
            x[k] = 1.0
            continue
        lo = U_MIN
        if ck + lam2 * a * math.exp((a - 1.0) * lo) + mu_bar * (lo + 1.0) >= 0.0:
            x[k] = 0.0
            continue
        hi = 0.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            d = ck + lam2 * a * math.exp((a - 1.0) * mid) + mu_bar * (mid + 1.0)
            if d > 0.0:
                hi = mid
            else:
                lo = mid
        x[k] = math.exp(0.5 * (lo + hi))
    return x


@njit(cache=True)
def _xlogx_sum(x):  # pragma: no cover - jitted
    s = 0.0
    for v in x:
        if v > 0.0:
            s += v * math.log(v)
    return s


@njit(cache=True)
def _dual_kernel(c, lam1, lam2, a, mu_bar, tol, t):  # pragma: no cover - jitted
    """Inner minimiser, Lagrangian value, its gradient in ``lam`` and the primal value of ``x / sum x``."""
    x = _coordinate_minimizers(c, lam1, lam2, a, mu_bar, tol)
    sx = 0.0
    cx = 0.0
    pa = 0.0
    for k in range(x.shape[0]):
        sx += x[k]
        cx += c[k] * x[k]
        pa += x[k] ** a
    ent = _xlogx_sum(x)
    ta = t ** (a / 2.0)
    val = cx + t + lam1 * (sx - 1.0) + lam2 * (pa - ta) + mu_bar * ent
    pval = math.inf
    if sx > 0.0:
        # objective at x / sx
        y = x / sx
        qa = 0.0
        for k in range(y.shape[0]):
            qa += y[k] ** a
        pval = cx / sx + qa ** (2.0 / a) + mu_bar * _xlogx_sum(y)
    return x, val, 1.0 - sx, ta - pa, sx, pval


def t_of_lambda(lam2: float, a: float, n: int) -> float:
    """Closed-form minimiser of ``t - lam2 t^(a/2)`` on ``[0, n^(2/a)]``."""
    if lam2 <= 0:
        return 0.0
    return min((lam2 * a / 2.0) ** (2.0 / (2.0 - a)), n ** (2.0 / a))


def inner_primal_from_dual(lam: DualPoint, sub: InnerSubproblem, sigma: float):
    """Approximate minimiser ``(x, t)`` of the Lagrangian at ``lam``.

    Each coordinate is bisected to ``sigma / n`` in ``ln x``, hence to at most
    ``sigma / n`` in ``x``, so ``||x - x(lam)||_1 <= sigma``.
    """
    if not sub.mu_bar > 0:
        raise ValueError("bisection needs mu_bar > 0; route mu_bar = 0 to the entropy setup")
    if lam.lambda2 < 0:
        raise ValueError("lambda2 must be non-negative")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    x = _coordinate_minimizers(sub.c, float(lam.lambda1), float(lam.lambda2), sub.a,
                               sub.mu_bar, sigma / sub.n)
    return x, t_of_lambda(lam.lambda2, sub.a, sub.n)


def slater_C(sub: InnerSubproblem) -> float:
    """Radius bound ``||lam_*||_1 <= 4 ||c||_inf + 4 mubar ln(2n) + 8``."""
    return 4.0 * float(np.max(np.abs(sub.c), initial=0.0)) + 4.0 * sub.mu_bar * math.log(2 * sub.n) + 8.0


def lagrangian(x, t, lam1, lam2, sub: InnerSubproblem) -> float:
    pos = x > 0
    ent = float(np.sum(x[pos] * np.log(x[pos])))
    return (float(sub.c @ x) + t + lam1 * (float(x.sum()) - 1.0)
            + lam2 * (float(np.sum(x**sub.a)) - t ** (sub.a / 2.0)) + sub.mu_bar * ent)


@dataclass
class DualEval:
    value: float          # of -G(lam), to be minimised
    grad: np.ndarray      # delta-gradient of -G
    delta: float
    x: np.ndarray
    t: float


def dual_value_grad(lam: DualPoint, sub: InnerSubproblem, sigma: float) -> DualEval:
    """Value and Demyanov-Danskin gradient of the negated dual ``-G(lam)``."""
    if not sub.mu_bar > 0:
        raise ValueError("bisection needs mu_bar > 0; route mu_bar = 0 to the entropy setup")
    if lam.lambda2 < 0:
        raise ValueError("lambda2 must be non-negative")
    t = t_of_lambda(lam.lambda2, sub.a, sub.n)
    x, val, g1, g2, _, _ = _dual_kernel(sub.c, float(lam.lambda1), float(lam.lambda2), sub.a,
                                        sub.mu_bar, sigma / sub.n, t)
    return DualEval(-val, np.array([g1, g2]), DELTA_KAPPA * slater_C(sub) * sigma, x, t)


# --------------------------------------------------------------------------
# ellipsoid method


@dataclass
class EllipsoidResult:
    x_best: np.ndarray
    f_best: float
    lower_bound: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)


def ellipsoid_iteration_cap(C: float, eps: float, r: int = 2) -> int:
    return int(math.ceil(4 * r * r * math.log(max(C / eps, math.e)))) + 64


def ellipsoid_minimize(fun: Callable, C: float, eps: float, *, delta: float = 0.0,
                       max_iter: Optional[int] = None, stop: Optional[Callable] = None,
                       keep_history: bool = False) -> EllipsoidResult:
    """Minimise a convex ``fun`` over ``{lam2 >= 0, |lam1| + lam2 <= C}``.

    ``fun(lam) -> (value, delta_gradient)``.  Starts from the ball of radius
    ``2C`` around ``(0, C/2)``.  Infeasible centres get a feasibility cut;
    feasible ones an objective cut.  The lower bound uses the fact that the
    minimiser stays in every ellipsoid: ``f* >= f_j - ||g_j||_{P_j} - delta``.
    Stops when ``f_best - lower <= eps``, when ``stop(lam, value, aux)``
    returns True, or at the iteration cap.
    """
    if max_iter is None:
        max_iter = ellipsoid_iteration_cap(C, eps)
    c1, c2 = 0.0, C / 2.0
    # shape matrix [[p11, p12], [p12, p22]]
    p11 = p22 = (2.0 * C) ** 2
    p12 = 0.0
    best = None
    f_best = math.inf
    lower = -math.inf
    history = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        if c2 < 0.0:
            g1, g2 = 0.0, -1.0
        elif abs(c1) + c2 > C:
            g1, g2 = (1.0 if c1 >= 0 else -1.0), 1.0
        else:
            out = fun(np.array([c1, c2]))
            val, g = out[0], out[1]
            g1, g2 = float(g[0]), float(g[1])
            if val < f_best:
                f_best, best = float(val), (c1, c2)
            gPg = p11 * g1 * g1 + 2 * p12 * g1 * g2 + p22 * g2 * g2
            lower = max(lower, val - math.sqrt(max(gPg, 0.0)) - delta)
            if keep_history:
                history.append((c1, c2, float(val), f_best, lower))
            if f_best - lower <= eps:
                converged = True
                break
            if stop is not None and stop(np.array([c1, c2]), val, out):
                converged = True
                break
            if g1 == 0.0 and g2 == 0.0:
                lower = max(lower, val - delta)
                converged = True
                break
        gPg = p11 * g1 * g1 + 2 * p12 * g1 * g2 + p22 * g2 * g2
        if gPg <= 0.0:
            break
        s = math.sqrt(gPg)
        b1 = (p11 * g1 + p12 * g2) / s
        b2 = (p12 * g1 + p22 * g2) / s
        c1 -= b1 / 3.0
        c2 -= b2 / 3.0
        # r = 2: P <- 4/3 (P - 2/3 b b^T)
        p11 = 4.0 / 3.0 * (p11 - 2.0 / 3.0 * b1 * b1)
        p12 = 4.0 / 3.0 * (p12 - 2.0 / 3.0 * b1 * b2)
        p22 = 4.0 / 3.0 * (p22 - 2.0 / 3.0 * b2 * b2)
    if best is None:
        best = (0.0, C / 2.0)
        f_best = float(fun(np.array(best))[0])
    return EllipsoidResult(np.array(best), f_best, lower, it, converged, history)


def ellipsoid_2d(sub: InnerSubproblem, eps_inner: float, *, keep_history: bool = False,
                 max_iter: Optional[int] = None):
    """Minimise ``-G(lam)`` for ``sub``; returns ``(DualPoint, EllipsoidResult)``.

    The bisection accuracy is chosen so that the delta-gradient slack is at
    most ``eps_inner / 4``.
    """
    C = slater_C(sub)
    sigma = eps_inner / (4.0 * DELTA_KAPPA * C)
    delta = DELTA_KAPPA * C * sigma

    def fun(lam):
        ev = dual_value_grad(DualPoint(lam[0], lam[1]), sub, sigma)
        return ev.value, ev.grad

    res = ellipsoid_minimize(fun, C, eps_inner, delta=delta, max_iter=max_iter,
                             keep_history=keep_history)
    if not res.converged:
        warnings.warn("ellipsoid_2d hit its iteration cap without a certified gap",
                      RuntimeWarning, stacklevel=2)
    return DualPoint(*res.x_best), res


@dataclass
class InnerSolution:
    x: np.ndarray
    value: float
    dual_value: float
    lam: DualPoint
    iterations: int
    converged: bool

    @property
    def gap(self) -> float:
        return self.value - self.dual_value


def _renormalise(x):
    s = x.sum()
    if not s > 0:
        raise FloatingPointError("all coordinates collapsed to zero")
    return x / s


def solve_inner(sub: InnerSubproblem, eps_inner: float = 1e-10, *,
                max_iter: Optional[int] = None) -> InnerSolution:
    """Primal solution of the subproblem on the simplex.

    Every dual evaluation yields a candidate ``x(lam) / sum x(lam)``; the best
    candidate by primal value is kept, and the loop stops once it is within
    ``eps_inner`` of the best dual value (weak duality makes this a
    certificate up to the bisection slack).
    """
    if not sub.mu_bar > 0:
        raise ValueError("solve_inner needs mu_bar > 0")
    C = slater_C(sub)
    sigma = eps_inner / (4.0 * DELTA_KAPPA * C)
    delta = DELTA_KAPPA * C * sigma
    state = {"x": None, "val": math.inf, "dual": -math.inf}
    c, a, mu_bar, n, tol = sub.c, sub.a, sub.mu_bar, sub.n, sigma / sub.n

    def fun(lam):
        l1, l2 = float(lam[0]), float(lam[1])
        x, val, g1, g2, sx, pv = _dual_kernel(c, l1, l2, a, mu_bar, tol, t_of_lambda(l2, a, n))
        if pv < state["val"]:
            state["x"], state["val"] = x / sx, pv
        if val > state["dual"]:
            state["dual"] = val
        return -val, (g1, g2)

    def stop(lam, val, out):
        return state["val"] - state["dual"] <= eps_inner

    res = ellipsoid_minimize(fun, C, eps_inner, delta=delta, max_iter=max_iter, stop=stop)
    if state["x"] is None:
        x, _ = inner_primal_from_dual(DualPoint(*res.x_best), sub, sigma)
        state["x"] = _renormalise(x)
    state["val"] = sub.objective(state["x"])
    return InnerSolution(state["x"], state["val"], state["dual"], DualPoint(*res.x_best),
                         res.iterations, res.converged)
