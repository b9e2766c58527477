import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fgmkit.core import Box, Composite, CompositeProblem, WholeSpace, quadratic_oracle
from fgmkit.fgm import fgm_solve
from fgmkit.prox import EuclideanSetup
from fgmkit.restart import (grad_mapping_norm, predicted_total, regularize, restart_count,
                            restart_length, restart_solve)


def diag_quadratic(n=100, mu=1.0, L=100.0, seed=0):
    rng = np.random.default_rng(seed)
    d = np.linspace(mu, L, n)
    xs = rng.uniform(-1, 1, n)
    p = CompositeProblem(quadratic_oracle(np.diag(d), d * xs, 0.5 * float(d @ xs ** 2)),
                         EuclideanSetup(WholeSpace(n)), mu=mu, L=L)
    return p, xs


def test_restart_length_examples():
    assert restart_length(1.0, 1.0, 1.0) == 3
    assert restart_length(100.0, 1.0, 1.0) == 29
    assert restart_length(2.0, 1.0, 2 * math.log(10)) == 9


def test_restart_count_examples():
    assert restart_count(1.0, 8.0, 1.0) == 3
    assert restart_count(0.1, 1.0, 1.0) == 1
    assert restart_count(1.0, 1.0, 1.0) == 1
    assert restart_count(2.0, 1.0, 1e-3) == 11


def test_restart_argument_errors():
    with pytest.raises(ValueError):
        restart_length(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        restart_count(1.0, 1.0, 0.0)


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(1.0, 20.0))
def test_restart_length_is_ceiling(L, mu, omega):
    N = restart_length(L, mu, omega)
    v = math.sqrt(8 * L * omega / mu)
    assert N >= v - 1e-9 and N - 1 < v


def test_distance_halves_at_every_restart():
    p, xs = diag_quadratic()
    eps = 1e-8
    rep = restart_solve(p, eps, dist2=float(xs @ xs))
    d2 = [float((c - xs) @ (c - xs)) for c in rep.info["centers"]]
    for a, b in zip(d2, d2[1:]):
        assert b <= 0.5 * a + 1e-9
    assert rep.F - p.value(xs) <= eps
    pred = predicted_total(100.0, 1.0, 1.0, float(xs @ xs), eps)
    assert rep.grad_calls <= 2 * pred


def test_optimal_start_is_fixed():
    p, xs = diag_quadratic(10)
    rep = restart_solve(p, 1e-6, dist2=1.0, x0=xs)
    for c in rep.info["centers"]:
        assert np.allclose(c, xs, atol=1e-15)
    assert np.allclose(rep.x, xs, atol=1e-15)


def test_segments_and_counters():
    p, xs = diag_quadratic(20)
    rep = restart_solve(p, 1e-6, dist2=float(xs @ xs))
    k = rep.info["restarts"]
    assert len(rep.info["centers"]) == k + 1
    assert rep.info["segment_length"] == [29] * k
    assert rep.iterations == 29 * k
    assert rep.grad_calls == 29 * k
    assert np.all(np.diff(rep.column("grad_calls")) >= 0)
    assert set(rep.column("restart")) == set(range(k))


def test_adaptive_restarts():
    p, xs = diag_quadratic(50)
    rep = restart_solve(p, 1e-8, adaptive=True, dist2=float(xs @ xs))
    d2 = [float((c - xs) @ (c - xs)) for c in rep.info["centers"]]
    for a, b in zip(d2, d2[1:]):
        assert b <= 0.5 * a + 1e-9
    assert rep.F - p.value(xs) <= 1e-8


def test_restart_needs_strong_convexity_and_bounds():
    p, _ = diag_quadratic(5)
    from dataclasses import replace
    with pytest.raises(ValueError):
        restart_solve(replace(p, mu=0.0), 1e-3, dist2=1.0)
    with pytest.raises(ValueError):
        restart_solve(p, 1e-3)  # unbounded set without dist2


def test_grad_mapping_examples():
    p = CompositeProblem(quadratic_oracle(np.eye(1)), EuclideanSetup(WholeSpace(1)))
    assert grad_mapping_norm(p, np.array([1.0]), 1.0) == pytest.approx(1.0)
    q, xs = diag_quadratic(10)
    assert grad_mapping_norm(q, xs, 100.0) <= 1e-10


def test_grad_mapping_stops_strongly_convex_run():
    p, xs = diag_quadratic(10, L=10.0)
    rep = fgm_solve(p, 1e-6, stop_rule="gradmap", R2=float(xs @ xs))
    assert rep.status == "converged"
    assert grad_mapping_norm(p, rep.x, p.L) <= 1e-6
    # for a mu-strongly convex smooth F: F - F_* <= ||G||^2 / (2 mu) up to the step factor
    assert rep.F - p.value(xs) <= 1e-6


def test_regularize_gamma():
    p = CompositeProblem(quadratic_oracle(np.eye(2)), EuclideanSetup(Box(-np.ones(2), np.ones(2))))
    r = regularize(p, 0.1, 1.0)
    assert r.composite.breg_weight == pytest.approx(0.05)
    assert r.mu == pytest.approx(0.05)
    with pytest.raises(ValueError):
        regularize(r, 0.1, 1.0)
    with pytest.raises(ValueError):
        regularize(p, 0.0, 1.0)


@given(st.integers(0, 2**31))
def test_regularized_value_sandwich(seed):
    rng = np.random.default_rng(seed)
    p = CompositeProblem(quadratic_oracle(np.diag([1.0, 0.0, 0.0]), np.array([0.5, 0.0, 0.0])),
                         EuclideanSetup(Box(-np.ones(3), np.ones(3))))
    eps = 10 ** rng.uniform(-4, -1)
    R2 = p.prox.R2_bound
    r = regularize(p, eps, R2)
    for x in rng.uniform(-1, 1, (20, 3)):
        assert p.value(x) <= r.value(x) <= p.value(x) + eps / 2 + 1e-15


def test_regularization_limit():
    p = CompositeProblem(quadratic_oracle(np.eye(2)), EuclideanSetup(Box(-np.ones(2), np.ones(2))))
    x = np.array([0.3, -0.7])
    diffs = [regularize(p, e, 1.0).value(x) - p.value(x) for e in (1e-1, 1e-3, 1e-6)]
    assert diffs[0] > diffs[1] > diffs[2] >= 0 and diffs[2] < 1e-6


@pytest.mark.parametrize("eps", [1e-2, 1e-3])
def test_regularized_solve_within_eps(eps):
    # rank-deficient quadratic with F_* = 0 attained on a face
    n = 10
    d = np.r_[np.ones(3), np.zeros(n - 3)]
    xs = np.r_[np.full(3, 0.5), np.zeros(n - 3)]
    p = CompositeProblem(quadratic_oracle(np.diag(d), d * xs, 0.5 * float(d @ xs ** 2)),
                         EuclideanSetup(Box(-np.ones(n), np.ones(n))), L=1.0)
    R2 = p.prox.R2_bound
    r = regularize(p, eps, R2)
    rep = restart_solve(r, eps / 2)
    assert p.value(rep.x) <= eps


def test_custom_composite_cannot_be_regularized():
    p = CompositeProblem(quadratic_oracle(np.eye(1)), EuclideanSetup(WholeSpace(1)),
                         Composite(value_fn=lambda x: 0.0, step_fn=lambda z, g, a: z - a * g))
    with pytest.raises(ValueError):
        regularize(p, 0.1, 1.0)
