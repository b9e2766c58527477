"""Prox setups and the composite mirror / gradient steps they induce.

Three setups are provided:

``EuclideanSetup``
    ``d(x) = 1/2 ||x - x0||_2^2`` on the whole space, a box or the simplex.
``EntropySetup``
    ``d(x) = ln n + sum x ln x`` on the simplex, norm ``l1``.  Steps with an
    entropy composite have a closed form.
``PowerNormSetup``
    ``d(x) = s / (2 (a - 1)) ||x||_a^2`` with ``a = 2 ln n / (2 ln n - 1)``
    on the simplex, norm ``l1``.  Steps are reduced to the subproblem solved
    in :mod:`fgmkit.inner`.

All steps solve ``argmin_{x in Q} <g, x> + V(x, z) / alpha + h(x)``;
``alpha = inf`` drops the Bregman term (used by the duality certificate)
and is supported whenever the remaining problem is bounded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Box, Composite, Simplex, WholeSpace, entropy_sum, norm, sample_feasible
from .inner import InnerSubproblem, solve_inner

LOG_FLOOR = 1e-300


def project_simplex(v) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum x = 1}`` (sort based)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _vertex_argmin(w) -> np.ndarray:
    """Minimiser of ``<w, x>`` on the simplex; ties share mass evenly."""
    w = np.asarray(w, dtype=float)
    mask = w <= w.min() + 1e-15 * max(1.0, abs(w.min()))
    return mask / mask.sum()


def _gibbs(logits) -> np.ndarray:
    s = logits - logits.max()
    e = np.exp(s)
    return e / e.sum()


class ProxSetup:
    """Base class.  Subclasses implement ``_phi``, ``_grad_phi``, ``step``.

    ``d(x) = V(x, center)`` so that ``d(center) = 0`` and ``grad d(center) = 0``.
    ``R2_bound`` bounds ``V(x, center)`` over the feasible set and
    ``dist2_bound`` bounds ``||x - center||^2``.
    """

    norm_id = "l2"
    feasible = None
    center: np.ndarray
    omega_n: float = 1.0
    R2_bound: float = math.inf
    dist2_bound: float = math.inf

    @property
    def n(self) -> int:
        return self.center.size

    def _phi(self, x) -> float:
        raise NotImplementedError

    def _grad_phi(self, x) -> np.ndarray:
        raise NotImplementedError

    def d(self, x) -> float:
        return self.bregman(x, self.center)

    def grad_d(self, x) -> np.ndarray:
        return self._grad_phi(x) - self._grad_phi(self.center)

    def bregman(self, x, z) -> float:
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        return self._phi(x) - self._phi(z) - float(self._grad_phi(z) @ (x - z))

    def norm(self, v) -> float:
        return norm(v, self.norm_id)

    def sample(self, rng, size=None):
        return sample_feasible(self.feasible, rng, size)

    def step(self, z, g, alpha: float, h: Composite) -> np.ndarray:
        raise NotImplementedError

    def recentred(self, center) -> "ProxSetup":
        """The same setup with a different prox centre."""
        raise NotImplementedError


# --------------------------------------------------------------------------


class EuclideanSetup(ProxSetup):
    norm_id = "l2"

    def __init__(self, feasible, center=None, R2_bound: Optional[float] = None):
        self.feasible = feasible
        self._box = isinstance(feasible, Box)
        self._simplex = isinstance(feasible, Simplex)
        n = feasible.n
        if center is None:
            if isinstance(feasible, Simplex):
                center = np.full(n, 1.0 / n)
            elif isinstance(feasible, Box):
                center = np.clip(np.zeros(n), feasible.lo, feasible.hi)
            else:
                center = np.zeros(n)
        self.center = np.asarray(center, dtype=float)
        self.omega_n = 1.0
        if isinstance(feasible, Box):
            far = np.maximum(np.abs(feasible.lo - self.center), np.abs(feasible.hi - self.center))
            self.dist2_bound = float(far @ far)
        elif isinstance(feasible, Simplex):
            e = np.eye(n) - self.center
            self.dist2_bound = float(np.max(np.sum(e * e, axis=1)))
        else:
            self.dist2_bound = math.inf
        self.R2_bound = 0.5 * self.dist2_bound if R2_bound is None else float(R2_bound)

    def recentred(self, center):
        s = EuclideanSetup(self.feasible, center)
        if isinstance(self.feasible, WholeSpace):
            s.R2_bound = self.R2_bound
        return s

    def _phi(self, x):
        return 0.5 * float(x @ x)

    def _grad_phi(self, x):
        return np.asarray(x, dtype=float)

    def bregman(self, x, z):
        d = np.asarray(x, dtype=float) - np.asarray(z, dtype=float)
        return 0.5 * float(d @ d)

    def step(self, z, g, alpha, h):
        if h.is_custom:
            return h.step_fn(self, z, g, alpha)
        if h.entropy:
            raise NotImplementedError("entropy composite needs the entropy or power-norm setup")
        lin = g if h.linear is None else g + h.linear
        gam = h.breg_weight
        Q = self.feasible
        if not gam and alpha != math.inf:
            u = z - alpha * lin
            if self._box:
                return np.minimum(np.maximum(u, Q.lo), Q.hi)
            return project_simplex(u) if self._simplex else u
        inv_a = 0.0 if math.isinf(alpha) else 1.0 / alpha
        w = inv_a + gam
        if w == 0.0:
            if isinstance(Q, Box):
                return np.where(lin > 0, Q.lo, np.where(lin < 0, Q.hi, 0.5 * (Q.lo + Q.hi)))
            if isinstance(Q, Simplex):
                return _vertex_argmin(lin)
            raise ValueError("linear model is unbounded on the whole space")
        u = (inv_a * z + gam * h.breg_center - lin) / w if inv_a else (gam * h.breg_center - lin) / w
        if isinstance(Q, Box):
            return np.minimum(np.maximum(u, Q.lo), Q.hi)
        if isinstance(Q, Simplex):
            return project_simplex(u)
        return u


class EntropySetup(ProxSetup):
    """KL geometry on the simplex, strongly convex in ``l1`` (Pinsker)."""

    norm_id = "l1"

    def __init__(self, n: int, center=None):
        self.feasible = Simplex(n)
        self.center = np.full(n, 1.0 / n) if center is None else np.asarray(center, dtype=float)
        if np.any(self.center <= 0):
            raise ValueError("entropy setup needs a strictly positive centre")
        self.omega_n = 2.0 * math.log(n) if n > 1 else 1.0
        # V(., center) is convex, so its maximum is at a vertex
        self.R2_bound = float(-np.log(self.center).max())
        e = np.eye(n) - self.center
        self.dist2_bound = float(np.max(np.abs(e).sum(axis=1)) ** 2)

    def recentred(self, center):
        return EntropySetup(self.n, np.maximum(center, LOG_FLOOR))

    def _phi(self, x):
        return entropy_sum(x) - float(np.sum(x))

    def _grad_phi(self, x):
        return np.log(np.maximum(x, LOG_FLOOR))

    def bregman(self, x, z):
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        if np.any(z <= 0):
            raise ValueError("entropy Bregman distance needs z in the relative interior")
        pos = x > 0
        return float(np.sum(x[pos] * np.log(x[pos] / z[pos])) - x.sum() + z.sum())

    def step(self, z, g, alpha, h):
        if h.is_custom:
            return h.step_fn(self, z, g, alpha)
        lin = np.asarray(g, dtype=float)
        if h.linear is not None:
            lin = lin + h.linear
        gam = h.breg_weight
        # stationarity: ln x * (1/alpha + mu + gam) = ln z / alpha + gam ln c - lin + const
        if math.isinf(alpha):
            w = h.entropy + gam
            if w == 0.0:
                return _vertex_argmin(lin)
            logits = -lin
            if gam:
                logits = logits + gam * np.log(np.maximum(h.breg_center, LOG_FLOOR))
            return _gibbs(logits / w)
        logits = np.log(np.maximum(z, LOG_FLOOR)) - alpha * lin
        if gam:
            logits = logits + alpha * gam * np.log(np.maximum(h.breg_center, LOG_FLOOR))
        return _gibbs(logits / (1.0 + alpha * (h.entropy + gam)))


@dataclass(frozen=True)
class PowerNormParams:
    a: float
    n: int

    @classmethod
    def from_dimension(cls, n: int) -> "PowerNormParams":
        if n < 3:
            raise ValueError("power-norm setup needs n >= 3 so that a < 2")
        ln = math.log(n)
        return cls(2 * ln / (2 * ln - 1), n)


def powernorm_d(params: PowerNormParams, x):
    """``||x||_a^2 / (2 (a - 1))`` and its gradient (zero coordinates give 0)."""
    a = params.a
    x = np.asarray(x, dtype=float)
    xa = np.where(x > 0, x, 0.0) ** a
    S = float(xa.sum())
    k = 1.0 / (2.0 * (a - 1.0))
    if S == 0.0:
        return 0.0, np.zeros_like(x)
    val = k * S ** (2.0 / a)
    grad = 2.0 * k * S ** (2.0 / a - 1.0) * np.where(x > 0, x, 0.0) ** (a - 1.0)
    return float(val), grad


class PowerNormSetup(ProxSetup):
    """``d(x) = scale * ||x||_a^2 / (2 (a - 1))`` on the simplex, norm ``l1``.

    With ``scale = e`` the function is 1-strongly convex in ``l1``: the
    ``a``-norm term is 1-strongly convex in ``||.||_a`` and
    ``||v||_a^2 >= n^(2/a - 2) ||v||_1^2 = exp(-1) ||v||_1^2`` for this ``a``.
    """

    norm_id = "l1"

    def __init__(self, n: int, center=None, scale: float = math.e, eps_inner: float = 1e-10):
        self.params = PowerNormParams.from_dimension(n)
        self.scale = float(scale)
        self.eps_inner = float(eps_inner)
        self.feasible = Simplex(n)
        self.center = np.full(n, 1.0 / n) if center is None else np.asarray(center, dtype=float)
        self.omega_n = 2.0 * math.log(n)
        self.R2_bound = max(self.bregman(e, self.center) for e in np.eye(n))
        e = np.eye(n) - self.center
        self.dist2_bound = float(np.max(np.abs(e).sum(axis=1)) ** 2)
        self.inner_iterations = 0
        self.inner_solves = 0

    @property
    def kappa(self) -> float:
        """Coefficient of ``||x||_a^2`` in ``d``."""
        return self.scale / (2.0 * (self.params.a - 1.0))

    def recentred(self, center):
        s = PowerNormSetup(self.n, center, self.scale, self.eps_inner)
        s.omega_n = self.omega_n
        return s

    def _phi(self, x):
        return self.scale * powernorm_d(self.params, x)[0]

    def _grad_phi(self, x):
        return self.scale * powernorm_d(self.params, x)[1]

    def subproblem(self, z, g, alpha, h) -> Optional[InnerSubproblem]:
        """Normalise the step model to unit ``||x||_a^2`` coefficient.

        Returns ``None`` when there is no ``a``-norm term (``alpha = inf`` and
        no Bregman composite), in which case the step is a Gibbs distribution.
        """
        lin = np.asarray(g, dtype=float)
        if h.linear is not None:
            lin = lin + h.linear
        gam = h.breg_weight
        inv_a = 0.0 if math.isinf(alpha) else 1.0 / alpha
        beta = self.kappa * (inv_a + gam)
        if beta == 0.0:
            return None
        if inv_a:
            lin = lin - inv_a * self._grad_phi(z)
        if gam:
            lin = lin - gam * self._grad_phi(h.breg_center)
        return InnerSubproblem(lin / beta, h.entropy / beta, self.params.a)

    def step(self, z, g, alpha, h):
        if h.is_custom:
            return h.step_fn(self, z, g, alpha)
        sub = self.subproblem(z, g, alpha, h)
        if sub is None:
            lin = np.asarray(g, dtype=float) + (0.0 if h.linear is None else h.linear)
            if h.entropy == 0.0:
                return _vertex_argmin(lin)
            return _gibbs(-lin / h.entropy)
        if sub.mu_bar == 0.0:
            raise ValueError("power-norm steps need an entropy composite (mu > 0)")
        sol = solve_inner(sub, self.eps_inner)
        self.inner_iterations += sol.iterations
        self.inner_solves += 1
        return sol.x


# --------------------------------------------------------------------------
# module-level operations


def bregman(setup: ProxSetup, x, z) -> float:
    return setup.bregman(x, z)


def mirror_step(setup: ProxSetup, z, g, alpha: float, h: Optional[Composite] = None):
    """``argmin_{x in Q} <g, x - z> + V(x, z) / alpha + h(x)``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return setup.step(z, g, alpha, Composite() if h is None else h)


def grad_step(setup: ProxSetup, x, grad_fx, fx: float, L: float, h: Optional[Composite] = None):
    """Proximal gradient mapping: minimiser of ``f(x) + <grad, y - x> + L V(y, x) + h(y)``.

    ``fx`` only shifts the model and does not affect the minimiser.
    """
    if not L > 0:
        raise ValueError("L must be positive")
    return mirror_step(setup, x, grad_fx, 1.0 / L, h)


def omega_estimate(setup: ProxSetup, sample_count: int, rng=None, centers: str = "center") -> float:
    """Empirical ``max 2 V(x, c) / ||x - c||^2`` over sampled ``x``.

    ``centers="center"`` uses the setup centre, ``"random"`` samples ``c`` too.
    """
    rng = np.random.default_rng(rng)
    worst = 0.0
    for _ in range(sample_count):
        x = setup.sample(rng)
        c = setup.center if centers == "center" else setup.sample(rng)
        if centers != "center" and setup.norm_id == "l1":
            c = np.maximum(c, LOG_FLOOR)
        d2 = setup.norm(x - c) ** 2
        if d2 > 1e-14:
            worst = max(worst, 2.0 * setup.bregman(x, c) / d2)
    return worst
