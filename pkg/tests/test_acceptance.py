"""End-to-end acceptance checks, one test and one PASS/FAIL line per criterion.

Run alone with ``pytest tests/test_acceptance.py -s`` (or ``-v``; the lines
are written with output capture disabled).
"""
import math
import time

import numpy as np
import pytest

from fgmkit.core import (Box, CompositeProblem, effective_L, holder_power_oracle, quadratic_oracle,
                         verify_dl_oracle, wrap_holder_as_inexact)
from fgmkit.entropy_lsq import predicted_outer_iterations, random_instance, solve_case_a, solve_case_b
from fgmkit.fgm import fgm_solve
from fgmkit.inner import InnerSubproblem, ellipsoid_2d, slater_C, solve_inner
from fgmkit.prox import EntropySetup, EuclideanSetup, PowerNormParams, PowerNormSetup, mirror_step
from fgmkit.restart import predicted_total, regularize, restart_solve
from fgmkit.stochastic import (StochasticOracle, batched_gradient, predicted_sample_budget,
                               stochastic_fgm_solve)
from fgmkit.core import Composite, WholeSpace
from fgmkit.suites import piecewise_linear_problem, quadratic_problem, sweep
from oracles import (dense_primal_min, entropic_gradient_reference, entropy_step_kkt,
                     grid_dual_max, lsq_entropy_value)


@pytest.fixture
def emit(capsys):
    def _emit(k, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {k}: {detail}", flush=True)
        assert ok, detail
    return _emit


def test_criterion_01_fgm_rate(emit):
    t = time.perf_counter()
    n = 50
    xs = np.random.default_rng(0).uniform(-2, 2, n)
    p = CompositeProblem(quadratic_oracle(np.eye(n), xs, 0.5 * xs @ xs),
                         EuclideanSetup(Box(-np.ones(n), np.ones(n))), L=1.0)
    rep = fgm_solve(p, 1e-300, stop_rule="iterations", num_iterations=200)
    xo = np.clip(xs, -1, 1)
    Fs = 0.5 * float((xo - xs) @ (xo - xs))
    R2 = 0.5 * float(xo @ xo)
    N = np.arange(rep.iterations + 1)
    excess = float(np.max(rep.column("F") - Fs - 4 * R2 / (N + 1) ** 2))
    dt = time.perf_counter() - t
    emit(1, rep.iterations == 200 and excess <= 1e-9 and dt < 1.0,
         f"max_N<=200 [F - F* - 4LR^2/(N+1)^2] = {excess:.3e} (tol 1e-9), {dt:.2f} s (< 1 s)")


def test_criterion_02_universal_exponent(emit):
    t = time.perf_counter()
    eps = [1e-1, 1e-2, 1e-3, 1e-4]
    rows0, fit0 = sweep(piecewise_linear_problem, eps)
    rows1, fit1 = sweep(quadratic_problem, eps)
    dt = time.perf_counter() - t
    ok = (abs(fit0.slope - 2) <= 0.4 and abs(fit1.slope - 0.5) <= 0.1
          and min(fit0.r2, fit1.r2) >= 0.95 and dt < 30
          and all(r.status == "converged" for r in rows0 + rows1))
    emit(2, ok, f"nu=0 slope {fit0.slope:.3f} R2 {fit0.r2:.3f} N={[r.iterations for r in rows0]}; "
                f"nu=1 slope {fit1.slope:.3f} R2 {fit1.r2:.4f} N={[r.iterations for r in rows1]}; "
                f"{dt:.1f} s (< 30 s)")


def test_criterion_03_backtracking_economy(emit):
    from fgmkit.universal import universal_solve
    runs = []
    for name, make, eps in (("nu=0", piecewise_linear_problem, 1e-3), ("nu=1", quadratic_problem, 1e-6)):
        for rule in ("precise", "coarse"):
            rep = universal_solve(make(), eps, delta_rule=rule)
            runs.append((name, rule, rep.iterations, rep.fval_calls / rep.iterations,
                         rep.evals_per_iteration()))
    ok = all(r[2] >= 50 and r[4] <= 4.5 for r in runs)
    worst = max(r[4] for r in runs)
    detail = "; ".join(f"{a}/{b}: N={c} fval/it={d:.3f} (fval+grad)/it={e:.3f}" for a, b, c, d, e in runs)
    emit(3, ok, f"max evaluations per iteration {worst:.3f} (<= 4.5); {detail}")


def test_criterion_04_restart_halving(emit):
    t = time.perf_counter()
    n = 100
    d = np.linspace(1.0, 100.0, n)
    xs = np.random.default_rng(0).uniform(-1, 1, n)
    p = CompositeProblem(quadratic_oracle(np.diag(d), d * xs, 0.5 * float(d @ xs ** 2)),
                         EuclideanSetup(WholeSpace(n)), mu=1.0, L=100.0)
    eps = 1e-8
    dist2 = float(xs @ xs)
    rep = restart_solve(p, eps, dist2=dist2)
    d2 = [float((c - xs) @ (c - xs)) for c in rep.info["centers"]]
    worst = max(b - 0.5 * a for a, b in zip(d2, d2[1:]))
    pred = predicted_total(100.0, 1.0, 1.0, dist2, eps)
    dt = time.perf_counter() - t
    ok = worst <= 1e-9 and rep.grad_calls <= 2 * pred and dt < 5
    emit(4, ok, f"{rep.info['restarts']} restarts, max[d_next - d_prev/2] = {worst:.2e} (tol 1e-9), "
                f"grad calls {rep.grad_calls} vs 2 x {pred:.0f}, {dt:.2f} s (< 5 s)")


def test_criterion_05_regularization(emit):
    n = 10
    d = np.r_[np.ones(3), np.zeros(n - 3)]
    xs = np.r_[np.full(3, 0.5), np.zeros(n - 3)]
    details, ok = [], True
    for eps in (1e-2, 1e-3):
        p = CompositeProblem(quadratic_oracle(np.diag(d), d * xs, 0.5 * float(d @ xs ** 2)),
                             EuclideanSetup(Box(-np.ones(n), np.ones(n))), L=1.0)
        R2 = p.prox.R2_bound
        reg = regularize(p, eps, R2)
        rep = restart_solve(reg, eps / 2)
        err = p.value(rep.x)  # F_* = 0
        ok &= err <= eps
        details.append(f"eps={eps:g}: gamma={reg.composite.breg_weight:.2e} F(y)-F*={err:.2e}")
    emit(5, ok, "; ".join(details))


def test_criterion_06_entropy_lsq_case_a(emit):
    t = time.perf_counter()
    P = random_instance(10, 5, 1e-6, 1e-6, seed=0, case="a")
    A = P.A.toarray()
    x_ref = entropic_gradient_reference(A, P.b, P.mu, 100_000)
    F_ref = lsq_entropy_value(A, P.b, P.mu, x_ref)
    rep = solve_case_a(P)
    F = lsq_entropy_value(A, P.b, P.mu, rep.x)
    dt = time.perf_counter() - t
    bound = 3 * math.sqrt(P.L * math.log(P.n) / P.eps)
    ok = abs(F - F_ref) <= 1e-6 and dt < 10 and rep.iterations <= bound
    emit(6, ok, f"|F - F_ref| = {abs(F - F_ref):.2e} (<= 1e-6), {rep.iterations} iterations "
                f"(<= {bound:.0f}), {dt:.2f} s incl. reference (< 10 s)")


def test_criterion_07_entropy_lsq_case_b(emit):
    t = time.perf_counter()
    P = random_instance(10, 5, 0.1, 1e-5, seed=0)
    A = P.A.toarray()
    x_ref = entropic_gradient_reference(A, P.b, P.mu, 1_000_000)
    F_ref = lsq_entropy_value(A, P.b, P.mu, x_ref)
    rep = solve_case_b(P)
    F = lsq_entropy_value(A, P.b, P.mu, rep.x)
    pred = predicted_outer_iterations(P)
    dt = time.perf_counter() - t
    ok = P.case == "b" and abs(F - F_ref) <= 1e-4 and rep.iterations <= 4 * pred and dt < 60
    emit(7, ok, f"|F - F_ref| = {abs(F - F_ref):.2e} (<= 1e-4), outer iterations {rep.iterations} "
                f"= {rep.iterations / pred:.2f} x prediction {pred:.1f} (<= 4x), {dt:.1f} s (< 60 s)")


def test_criterion_08_inner_dual_solver(emit):
    a5 = PowerNormParams.from_dimension(5).a
    dual_err = primal_err = 0.0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        sub = InnerSubproblem(rng.standard_normal(5), 0.1, a5)
        C = slater_C(sub)
        _, res = ellipsoid_2d(sub, 1e-10)
        _, _, g = grid_dual_max(sub.c, sub.mu_bar, sub.a, C, resolution=1e-3)
        dual_err = max(dual_err, abs(-res.f_best - g))
        sol = solve_inner(sub)
        primal_err = max(primal_err, abs(sol.value - dense_primal_min(sub.c, sub.mu_bar, sub.a)))
    a10 = PowerNormParams.from_dimension(10).a
    worst_ratio = 0.0
    for seed in range(100):
        rng = np.random.default_rng(1000 + seed)
        sub = InnerSubproblem(rng.standard_normal(10), 0.1, a10)
        C = slater_C(sub)
        l1, l2, _ = grid_dual_max(sub.c, sub.mu_bar, sub.a, C, resolution=1e-2, box=3.0, first=25)
        worst_ratio = max(worst_ratio, (abs(l1) + abs(l2)) / C)
    ok = dual_err <= 1e-4 and primal_err <= 1e-4 and worst_ratio <= 1.0
    emit(8, ok, f"dual vs grid {dual_err:.2e}, primal vs dense grid {primal_err:.2e} (<= 1e-4, 20 seeds); "
                f"max ||lam*||_1 / C = {worst_ratio:.3f} over 100 seeds (<= 1)")


def test_criterion_09_prox_invariants(emit):
    worst_p, worst_o = math.inf, -math.inf
    for n in (3, 10, 100):
        rng = np.random.default_rng(n)
        for setup in (EntropySetup(n), PowerNormSetup(n)):
            X = rng.dirichlet(np.ones(n), 10_000)
            Y = rng.dirichlet(np.ones(n), 10_000)
            c = setup.center
            for x, y in zip(X, Y):
                worst_p = min(worst_p, setup.bregman(x, y) - 0.5 * np.abs(x - y).sum() ** 2)
                worst_o = max(worst_o, 2 * setup.bregman(x, c) - setup.omega_n * np.abs(x - c).sum() ** 2)
    rng = np.random.default_rng(9)
    step_err = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 20))
        z = rng.dirichlet(np.ones(n))
        g = 3 * rng.standard_normal(n)
        alpha = 10 ** rng.uniform(-2, 1)
        mu = float(rng.choice([0.0, 10 ** rng.uniform(-3, 0)]))
        x = mirror_step(EntropySetup(n), z, g, alpha, Composite(entropy=mu))
        step_err = max(step_err, float(np.abs(x - entropy_step_kkt(z, g, alpha, mu)).max()))
    ok = worst_p >= -1e-12 and worst_o <= 1e-12 and step_err <= 1e-8
    emit(9, ok, f"min[V - ||.||_1^2/2] = {worst_p:.2e}, max[2V - omega ||.||_1^2] = {worst_o:.2e} "
                f"(1e4 pairs x 2 setups x n in 3,10,100); entropy step vs KKT solve {step_err:.2e} (<= 1e-8)")


def test_criterion_10_minibatch(emit):
    n, D = 5, 0.05
    rng0 = np.random.default_rng(0)
    Q = np.diag(np.linspace(0.1, 1.0, n))
    xs = rng0.uniform(-0.5, 0.5, n)
    b = Q @ xs
    Fs = -0.5 * float(xs @ Q @ xs)

    def sample(x, rng):
        return Q @ x - b + rng.normal(0.0, math.sqrt(D / n), n)

    m, x = 16, np.full(n, 0.2)
    g = Q @ x - b
    o = StochasticOracle(sample, D)
    rng = np.random.default_rng(1)
    var = np.mean([np.sum((batched_gradient(o, x, m, rng)[0] - g) ** 2) for _ in range(10_000)])
    eps = 1e-2
    gaps, used = [], []
    for seed in range(30):
        p = CompositeProblem(quadratic_oracle(Q, b), EuclideanSetup(Box(-np.ones(n), np.ones(n))), L=1.0)
        budget = 4 * predicted_sample_budget(1.0, p.prox.R2_bound, D, eps)
        rep = stochastic_fgm_solve(p, StochasticOracle(sample, D), eps, rng=seed, max_samples=budget)
        gaps.append(p.value(rep.x) - Fs)
        used.append(rep.info["samples"] / budget)
    med = float(np.median(gaps))
    ok = var <= 1.2 * D / m and med <= eps and max(used) <= 1.0
    emit(10, ok, f"batch-mean variance {var:.4e} vs 1.2 D/m = {1.2 * D / m:.4e}; median gap over 30 seeds "
                 f"{med:.2e} (<= {eps:g}), samples used <= {max(used):.2f} of the 4x budget")


def test_criterion_11_oracle_contract(emit):
    rng = np.random.default_rng(11)
    worst = -math.inf
    for _ in range(3):
        M = rng.standard_normal((6, 6))
        Qm = M @ M.T
        o = quadratic_oracle(Qm, rng.standard_normal(6))
        rep = verify_dl_oracle(o, o.value, lambda r: r.uniform(-2, 2, 6), 1000, rng=rng,
                               delta=0.0, L=float(np.linalg.eigvalsh(Qm).max()))
        worst = max(worst, rep.max_lower_violation, rep.max_upper_violation)
    for nu in (0.0, 0.25, 0.5, 0.75, 1.0):
        for delta in (1e-4, 1e-2):
            o, hc = holder_power_oracle(nu, 1.0, np.array([0.1, -0.2, 0.3]))
            inex = wrap_holder_as_inexact(o, hc, delta)
            assert inex.L == effective_L(hc, delta)
            rep = verify_dl_oracle(inex, o.value, lambda r: r.uniform(-1, 1, 3), 1000, rng=rng)
            worst = max(worst, rep.max_lower_violation, rep.max_upper_violation)
    emit(11, worst <= 1e-9, f"max violation {worst:.2e} (<= 1e-9) over 3 quadratics and 10 Hoelder "
                            f"(nu, delta) pairs, 1000 pairs each")
