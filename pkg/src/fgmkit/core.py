"""Oracle abstractions and problem containers.

A smooth part ``f`` is accessed only through oracles.  Two kinds exist:

* :class:`FirstOrderOracle` returns the exact pair ``(f(x), grad f(x))``;
* :class:`InexactOracle` returns an :class:`InexactOracleOutput`, i.e. a pair
  certified to satisfy, for every ``y`` in the feasible set::

      0 <= f(y) - f_val - <g, y - x> <= L/2 ||y - x||^2 + delta

A function with Hoelder-continuous gradient (exponent ``nu``, constant
``L_nu``) fits this model for any ``delta > 0`` with ``L`` given by
:func:`effective_L`.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .prox import ProxSetup


# --------------------------------------------------------------------------
# norms


def norm(v, norm_id: str = "l2") -> float:
    """Primal norm used by the prox setups (``"l1"`` or ``"l2"``)."""
    v = np.asarray(v, dtype=float)
    if norm_id == "l2":
        return float(np.sqrt(v @ v))
    if norm_id == "l1":
        return float(np.abs(v).sum())
    raise ValueError(f"unknown norm {norm_id!r}")


# --------------------------------------------------------------------------
# oracles


class FirstOrderOracle:
    """Exact first-order oracle with call counters.

    Parameters
    ----------
    fun : callable
        ``fun(x) -> (value, gradient)``.  Must be pure.
    value : callable, optional
        ``value(x) -> float``; cheaper zero-order evaluation.  Falls back to
        ``fun(x)[0]``.

    ``grad_calls`` counts evaluations through :meth:`__call__`, ``fval_calls``
    counts value-only evaluations through :meth:`value`.  Increments are
    guarded by a lock so the oracle can be shared between threads.
    """

    def __init__(self, fun: Callable, value: Optional[Callable] = None):
        self._fun = fun
        self._value = value
        self._lock = threading.Lock()
        self.grad_calls = 0
        self.fval_calls = 0

    def __call__(self, x):
        fx, g = self._fun(x)
        with self._lock:
            self.grad_calls += 1
        return float(fx), np.asarray(g, dtype=float)

    eval = __call__

    def value(self, x) -> float:
        fx = self._value(x) if self._value is not None else self._fun(x)[0]
        with self._lock:
            self.fval_calls += 1
        return float(fx)

    def reset_counters(self) -> None:
        with self._lock:
            self.grad_calls = 0
            self.fval_calls = 0


@dataclass(frozen=True)
class InexactOracleOutput:
    f_val: float
    g: np.ndarray
    delta: float
    L: float


class InexactOracle:
    """A (delta, L)-oracle built on top of a :class:`FirstOrderOracle`.

    The returned values are those of ``base``; the certificate ``(delta, L)``
    is attached to every output.
    """

    def __init__(self, base: FirstOrderOracle, delta: float, L: float):
        if delta < 0:
            raise ValueError("delta must be non-negative")
        if L <= 0:
            raise ValueError("L must be positive")
        self.base = base
        self.delta = float(delta)
        self.L = float(L)

    def __call__(self, x) -> InexactOracleOutput:
        fx, g = self.base(x)
        return InexactOracleOutput(fx, g, self.delta, self.L)

    eval = __call__

    def value(self, x) -> float:
        return self.base.value(x)

    @property
    def grad_calls(self) -> int:
        return self.base.grad_calls

    @property
    def fval_calls(self) -> int:
        return self.base.fval_calls

    def reset_counters(self) -> None:
        self.base.reset_counters()


def call_oracle(oracle, x):
    """Evaluate either oracle kind; returns ``(f, g, delta)``."""
    out = oracle(x)
    if isinstance(out, InexactOracleOutput):
        return out.f_val, out.g, out.delta
    fx, g = out
    return fx, g, 0.0


@dataclass(frozen=True)
class HolderClass:
    """Gradient is ``nu``-Hoelder with constant ``L_nu`` in the dual norm."""

    nu: float
    L_nu: float

    def __post_init__(self):
        if not 0.0 <= self.nu <= 1.0:
            raise ValueError(f"nu must lie in [0, 1], got {self.nu}")
        if not self.L_nu > 0:
            raise ValueError(f"L_nu must be positive, got {self.L_nu}")


def effective_L(hc: HolderClass, delta: float) -> float:
    """Smoothness constant of the (delta, L) model of a Hoelder function.

    ``L = L_nu * [ L_nu / (2 delta) * (1 - nu) / (1 + nu) ] ** ((1 - nu) / (1 + nu))``
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    nu, L_nu = hc.nu, hc.L_nu
    p = (1.0 - nu) / (1.0 + nu)
    if p == 0.0:
        return float(L_nu)
    return float(L_nu * (L_nu / (2.0 * delta) * p) ** p)


def delta_schedule(eps: float, N: int, p: int = 1, c: float = 0.5) -> float:
    """Admissible oracle inexactness ``c * eps / N**p`` for ``p`` in {0, 1}."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if N < 1:
        raise ValueError("N must be >= 1")
    if p not in (0, 1):
        raise ValueError("only p in {0, 1} is supported")
    return c * eps / N**p


def wrap_holder_as_inexact(oracle: FirstOrderOracle, hc: HolderClass, delta: float) -> InexactOracle:
    """Reinterpret an exact oracle of a Hoelder function as a (delta, L)-oracle."""
    return InexactOracle(oracle, delta, effective_L(hc, delta))


@dataclass
class OracleReport:
    max_lower_violation: float
    max_upper_violation: float
    num_pairs: int

    def ok(self, tol: float = 1e-9) -> bool:
        return self.max_lower_violation <= tol and self.max_upper_violation <= tol


def verify_dl_oracle(oracle, true_f: Callable, sampler: Callable, num_pairs: int, *,
                     norm_id: str = "l2", rng=None, delta: Optional[float] = None,
                     L: Optional[float] = None) -> OracleReport:
    """Check the (delta, L)-oracle inequalities on random pairs.

    ``sampler(rng)`` must return a point of the feasible set.  For an exact
    oracle returning ``(f, g)`` the certificate must be passed explicitly via
    ``delta`` and ``L``; for an :class:`InexactOracle` they are read from its
    output unless overridden.

    Violations are reported as the largest amount by which either side of the
    inequality fails; both are ``<= 0`` when the contract holds on the sample.
    """
    rng = np.random.default_rng(rng)
    lower = -np.inf
    upper = -np.inf
    for _ in range(num_pairs):
        x = np.asarray(sampler(rng), dtype=float)
        y = np.asarray(sampler(rng), dtype=float)
        out = oracle(x)
        if isinstance(out, InexactOracleOutput):
            fx, g = out.f_val, out.g
            d = out.delta if delta is None else delta
            Lc = out.L if L is None else L
        else:
            fx, g = out
            if delta is None or L is None:
                raise ValueError("exact oracles need explicit delta and L")
            d, Lc = delta, L
        gap = true_f(y) - fx - float(np.dot(g, y - x))
        lower = max(lower, -gap)
        upper = max(upper, gap - 0.5 * Lc * norm(y - x, norm_id) ** 2 - d)
    return OracleReport(float(lower), float(upper), num_pairs)


# --------------------------------------------------------------------------
# feasible sets


@dataclass(frozen=True)
class WholeSpace:
    n: int


@dataclass(frozen=True)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != hi.shape or np.any(lo > hi):
            raise ValueError("box needs lo <= hi with equal shapes")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n(self) -> int:
        return self.lo.size


@dataclass(frozen=True)
class Simplex:
    n: int


def sample_feasible(Q, rng, size=None):
    """Random points of ``Q`` (uniform for simplex and box)."""
    if isinstance(Q, Simplex):
        return rng.dirichlet(np.ones(Q.n), size=size)
    if isinstance(Q, Box):
        shape = (Q.n,) if size is None else (size, Q.n)
        return Q.lo + (Q.hi - Q.lo) * rng.random(shape)
    if isinstance(Q, WholeSpace):
        shape = (Q.n,) if size is None else (size, Q.n)
        return rng.standard_normal(shape)
    raise TypeError(f"unknown feasible set {Q!r}")


# --------------------------------------------------------------------------
# composite part


def entropy_sum(x) -> float:
    """``sum x ln x`` with ``0 ln 0 = 0``."""
    x = np.asarray(x, dtype=float)
    pos = x > 0
    return float(np.sum(x[pos] * np.log(x[pos])))


@dataclass(frozen=True)
class Composite:
    """Simple convex term ``h`` handled inside the prox steps.

    ``h(x) = entropy * sum x ln x + <linear, x> + breg_weight * V(x, breg_center)``

    where ``V`` is the Bregman distance of the prox setup of the problem that
    owns the composite.  ``value_fn``/``step_fn`` describe a custom term: the
    step hook has signature ``step_fn(setup, z, g, alpha) -> point`` and must
    return ``argmin <g, x> + V(x, z) / alpha + h(x)`` over the feasible set.
    """

    entropy: float = 0.0
    linear: Optional[np.ndarray] = None
    breg_weight: float = 0.0
    breg_center: Optional[np.ndarray] = None
    value_fn: Optional[Callable] = None
    step_fn: Optional[Callable] = None

    def __post_init__(self):
        if self.entropy < 0 or self.breg_weight < 0:
            raise ValueError("composite weights must be non-negative")
        if self.breg_weight > 0 and self.breg_center is None:
            raise ValueError("breg_weight > 0 needs breg_center")
        if (self.value_fn is None) != (self.step_fn is None):
            raise ValueError("custom composite needs both value_fn and step_fn")

    @property
    def is_custom(self) -> bool:
        return self.step_fn is not None

    @property
    def is_zero(self) -> bool:
        return (self.entropy == 0 and self.linear is None and self.breg_weight == 0
                and not self.is_custom)

    def value(self, x, setup: "ProxSetup | None" = None) -> float:
        if self.is_custom:
            return float(self.value_fn(x))
        v = 0.0
        if self.entropy:
            v += self.entropy * entropy_sum(x)
        if self.linear is not None:
            v += float(np.dot(self.linear, x))
        if self.breg_weight:
            if setup is None:
                raise ValueError("Bregman term needs the prox setup")
            v += self.breg_weight * setup.bregman(x, self.breg_center)
        return v

    def scaled(self, s: float) -> "Composite":
        """``s * h`` for ``s >= 0``."""
        if self.is_custom:
            vf, sf = self.value_fn, self.step_fn
            return Composite(value_fn=lambda x: s * vf(x),
                             step_fn=lambda setup, z, g, a: sf(setup, z, g / s, a * s)
                             if s > 0 else z)
        return Composite(self.entropy * s,
                         None if self.linear is None else s * np.asarray(self.linear),
                         self.breg_weight * s, self.breg_center)


@dataclass
class CompositeProblem:
    """``F(x) = f(x) + h(x) -> min`` over the feasible set of ``prox``.

    ``mu`` is the strong convexity modulus of ``F`` in the norm of the prox
    setup (0 if unknown or absent).  ``L`` is the smoothness constant of ``f``
    in the same norm when it is known.
    """

    smooth: object
    prox: "ProxSetup"
    composite: Composite = field(default_factory=Composite)
    mu: float = 0.0
    L: Optional[float] = None

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError("mu must be non-negative")
        if self.L is not None and not self.L > 0:
            raise ValueError("L must be positive")

    @property
    def feasible_set(self):
        return self.prox.feasible

    @property
    def n(self) -> int:
        return self.prox.n

    def h(self, x) -> float:
        return self.composite.value(x, self.prox)

    def value(self, x) -> float:
        """``F(x)``; counts one function-value call."""
        return self.smooth.value(x) + self.h(x)

    def known_L(self) -> Optional[float]:
        if self.L is not None:
            return self.L
        return getattr(self.smooth, "L", None)


def quadratic_oracle(Q, b=None, c: float = 0.0) -> FirstOrderOracle:
    """Oracle of ``1/2 x^T Q x - b^T x + c`` (dense ``Q``)."""
    Q = np.asarray(Q, dtype=float)
    b = np.zeros(Q.shape[0]) if b is None else np.asarray(b, dtype=float)

    def fun(x):
        Qx = Q @ x
        return 0.5 * x @ Qx - b @ x + c, Qx - b

    def value(x):
        return 0.5 * x @ (Q @ x) - b @ x + c

    return FirstOrderOracle(fun, value)


def holder_power_oracle(nu: float, scale: float = 1.0, center=None) -> tuple[FirstOrderOracle, HolderClass]:
    """Oracle of ``scale * ||x - center||_2 ** (1 + nu)`` and its Hoelder class.

    The gradient map ``x -> ||x||^(nu - 1) x`` is ``nu``-Hoelder with constant
    ``2 ** (1 - nu)``, so ``L_nu = scale * (1 + nu) * 2 ** (1 - nu)``.
    """
    p = 1.0 + nu

    def fun(x):
        d = x if center is None else x - center
        r = math.sqrt(float(d @ d))
        if r == 0.0:
            return 0.0, np.zeros_like(d)
        return scale * r**p, scale * p * r ** (p - 2.0) * d

    def value(x):
        d = x if center is None else x - center
        return scale * math.sqrt(float(d @ d)) ** p

    return FirstOrderOracle(fun, value), HolderClass(nu, scale * p * 2.0 ** (1.0 - nu))
