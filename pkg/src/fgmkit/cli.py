"""Command-line front end.

Subcommands::

    solve             minimise 1/2 ||A x - b||^2 + mu sum x ln x over the simplex
    demo-entropy-lsq  seeded random instance, both cases where applicable
    benchmark         eps sweeps with fitted log-log slopes
    selftest          fast invariant checks

Exit codes: 0 success, 1 invalid input, 2 solver failure.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from dataclasses import dataclass, fields
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .core import Composite, CompositeProblem, Simplex
from .entropy_lsq import (EntropyLsqProblem, lipschitz_1norm, mirror_descent_reference,
                          random_instance, solve_case_a, solve_case_b)
from .fgm import STOP_RULES, fgm_solve
from .prox import EntropySetup, EuclideanSetup, PowerNormSetup
from .report import HISTORY_HEADER, RunReport
from .restart import regularize, restart_solve
from .stochastic import StochasticOracle, stochastic_fgm_solve
from .universal import BacktrackError, universal_solve

METHODS = ("fgm", "universal", "restart", "regularize", "stochastic")
PROXES = ("euclidean", "entropy", "powernorm")
DELTA_RULES = ("precise", "coarse")


class InputError(ValueError):
    """Malformed input file or invalid configuration."""


# --------------------------------------------------------------------------
# files


def load_matrix(path) -> sp.csr_matrix:
    """Read ``m n nnz`` followed by ``nnz`` lines ``i j value`` (1-based)."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    body = [(k + 1, ln.split()) for k, ln in enumerate(lines) if ln.strip()]
    if not body:
        raise InputError(f"{path}: empty matrix file")
    lineno, head = body[0]
    if len(head) != 3:
        raise InputError(f"{path}:{lineno}: header must be 'm n nnz'")
    try:
        m, n, nnz = (int(t) for t in head)
    except ValueError:
        raise InputError(f"{path}:{lineno}: header must hold three integers") from None
    if m < 1 or n < 1 or nnz < 0 or nnz > m * n:
        raise InputError(f"{path}:{lineno}: invalid dimensions {m} x {n} with {nnz} entries")
    if len(body) - 1 != nnz:
        raise InputError(f"{path}: header declares {nnz} entries, found {len(body) - 1}")
    rows, cols, vals = np.empty(nnz, int), np.empty(nnz, int), np.empty(nnz)
    seen = set()
    for k, (lineno, tok) in enumerate(body[1:]):
        if len(tok) != 3:
            raise InputError(f"{path}:{lineno}: expected 'i j value'")
        try:
            i, j, v = int(tok[0]), int(tok[1]), float(tok[2])
        except ValueError:
            raise InputError(f"{path}:{lineno}: cannot parse entry {' '.join(tok)!r}") from None
        if not (1 <= i <= m and 1 <= j <= n):
            raise InputError(f"{path}:{lineno}: index ({i}, {j}) outside {m} x {n}")
        if not math.isfinite(v):
            raise InputError(f"{path}:{lineno}: non-finite value")
        if (i, j) in seen:
            raise InputError(f"{path}:{lineno}: duplicate entry ({i}, {j})")
        seen.add((i, j))
        rows[k], cols[k], vals[k] = i - 1, j - 1, v
    return sp.csr_matrix((vals, (rows, cols)), shape=(m, n))


def write_matrix(M, path) -> None:
    """Inverse of :func:`load_matrix` (explicit entries, row-major order)."""
    M = sp.coo_matrix(M)
    order = np.lexsort((M.col, M.row))
    with open(path, "w") as fh:
        fh.write(f"{M.shape[0]} {M.shape[1]} {M.nnz}\n")
        for k in order:
            fh.write(f"{M.row[k] + 1} {M.col[k] + 1} {float(M.data[k])!r}\n")


def load_vector(path) -> np.ndarray:
    """Read ``n`` followed by ``n`` values, one per line."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    body = [(k + 1, ln.strip()) for k, ln in enumerate(lines) if ln.strip()]
    if not body:
        raise InputError(f"{path}: empty vector file")
    lineno, head = body[0]
    try:
        n = int(head)
    except ValueError:
        raise InputError(f"{path}:{lineno}: first line must be the length") from None
    if n < 1 or len(body) - 1 != n:
        raise InputError(f"{path}: header declares {n} values, found {len(body) - 1}")
    out = np.empty(n)
    for k, (lineno, tok) in enumerate(body[1:]):
        try:
            out[k] = float(tok)
        except ValueError:
            raise InputError(f"{path}:{lineno}: cannot parse value {tok!r}") from None
        if not math.isfinite(out[k]):
            raise InputError(f"{path}:{lineno}: non-finite value")
    return out


def write_vector(v, path) -> None:
    v = np.asarray(v, dtype=float).ravel()
    with open(path, "w") as fh:
        fh.write(f"{v.size}\n")
        fh.writelines(f"{float(x)!r}\n" for x in v)


def write_history(report: RunReport, path) -> None:
    """CSV with one row per record; floats written with ``repr`` so output is deterministic."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HISTORY_HEADER)
        for rec in report.records:
            w.writerow(rec.row())


# --------------------------------------------------------------------------
# configuration


@dataclass
class Config:
    eps: float = 1e-4
    method: str = "fgm"
    prox: str = "entropy"
    L0: float = 1.0
    delta_rule: str = "precise"
    seed: int = 0
    max_oracle_calls: Optional[int] = None
    stop_rule: str = "gap"
    mu: float = 0.0
    noise_D: float = 0.0
    max_iter: int = 100_000
    adaptive: bool = False

    def validate(self) -> "Config":
        checks = [
            (self.eps > 0, "eps must be positive"),
            (self.method in METHODS, f"method must be one of {METHODS}"),
            (self.prox in PROXES, f"prox must be one of {PROXES}"),
            (self.L0 > 0, "L0 must be positive"),
            (self.delta_rule in DELTA_RULES, f"delta_rule must be one of {DELTA_RULES}"),
            (self.seed >= 0, "seed must be non-negative"),
            (self.max_oracle_calls is None or self.max_oracle_calls > 0,
             "max_oracle_calls must be positive"),
            (self.stop_rule in STOP_RULES, f"stop_rule must be one of {STOP_RULES}"),
            (self.mu >= 0, "mu must be non-negative"),
            (self.noise_D >= 0, "noise_D must be non-negative"),
            (self.max_iter > 0, "max_iter must be positive"),
            (self.stop_rule != "budget" or self.max_oracle_calls is not None,
             "stop_rule = budget needs max_oracle_calls"),
        ]
        for ok, msg in checks:
            if not ok:
                raise InputError(f"config: {msg}")
        return self


def _convert(typ, raw: str):
    if typ is bool or typ == "bool":
        low = raw.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ValueError(raw)
    if "int" in str(typ):
        if "Optional" in str(typ) and raw.lower() in ("none", ""):
            return None
        return int(raw)
    if "float" in str(typ):
        return float(raw)
    return raw


def parse_config(text: str, source: str = "<config>") -> Config:
    """Parse ``key = value`` lines; ``#`` starts a comment; unknown keys are rejected."""
    types = {f.name: f.type for f in fields(Config)}
    values = {}
    for k, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{source}:{k}: expected 'key = value'")
        key, raw = (t.strip() for t in line.split("=", 1))
        if key not in types:
            raise InputError(f"{source}:{k}: unknown key {key!r}")
        if key in values:
            raise InputError(f"{source}:{k}: duplicate key {key!r}")
        try:
            values[key] = _convert(types[key], raw)
        except ValueError:
            raise InputError(f"{source}:{k}: bad value {raw!r} for {key}") from None
    return Config(**values).validate()


def load_config(path) -> Config:
    with open(path) as fh:
        return parse_config(fh.read(), str(path))


# --------------------------------------------------------------------------
# drivers


def build_problem(A, b, cfg: Config) -> CompositeProblem:
    """Least squares plus ``mu`` entropy over the simplex with the configured prox."""
    lsq = EntropyLsqProblem(A, b, cfg.mu, cfg.eps, case="a")
    n = lsq.n
    if cfg.prox == "euclidean":
        if cfg.mu > 0:
            raise InputError("config: the euclidean prox does not support mu > 0")
        setup = EuclideanSetup(Simplex(n))
        dense = lsq.A.toarray()
        L = float(np.linalg.norm(dense, 2) ** 2) if dense.size else 0.0
    elif cfg.prox == "entropy":
        setup = EntropySetup(n)
        L = lipschitz_1norm(lsq.A)
    else:
        if n < 3:
            raise InputError("config: the powernorm prox needs n >= 3")
        if cfg.mu == 0 and cfg.method not in ("regularize",):
            raise InputError("config: the powernorm prox needs mu > 0")
        setup = PowerNormSetup(n)
        L = lipschitz_1norm(lsq.A)
    smooth = lsq.oracle()
    return CompositeProblem(smooth, setup, Composite(entropy=cfg.mu), mu=cfg.mu,
                            L=L if L > 0 else 1.0)


def solve(problem: CompositeProblem, cfg: Config) -> RunReport:
    common = dict(max_iter=cfg.max_iter)
    if cfg.method == "fgm":
        return fgm_solve(problem, cfg.eps, cfg.max_oracle_calls, stop_rule=cfg.stop_rule, **common)
    if cfg.method == "universal":
        if cfg.stop_rule == "iterations":
            raise InputError("config: the universal method cannot use stop_rule = iterations")
        return universal_solve(problem, cfg.eps, cfg.max_oracle_calls, L0=cfg.L0,
                               delta_rule=cfg.delta_rule, stop_rule=cfg.stop_rule, **common)
    if cfg.method == "restart":
        if not cfg.mu > 0:
            raise InputError("config: method = restart needs mu > 0")
        return restart_solve(problem, cfg.eps, adaptive=cfg.adaptive, L0=cfg.L0)
    if cfg.method == "regularize":
        R2 = problem.prox.R2_bound
        reg = regularize(problem, cfg.eps, R2)
        return restart_solve(reg, cfg.eps / 2.0, adaptive=cfg.adaptive, L0=cfg.L0)
    # stochastic: exact gradient plus Gaussian noise of total variance noise_D
    n = problem.n
    base = problem.smooth
    scale = math.sqrt(cfg.noise_D / n)

    def sample(x, rng):
        return base(x)[1] + scale * rng.standard_normal(n)

    return stochastic_fgm_solve(problem, StochasticOracle(sample, cfg.noise_D), cfg.eps, cfg.seed)


def _cmd_solve(args) -> int:
    cfg = load_config(args.config) if args.config else Config().validate()
    A = load_matrix(args.matrix)
    b = load_vector(args.rhs)
    if A.shape[0] != b.size:
        raise InputError(f"matrix has {A.shape[0]} rows but rhs has {b.size} values")
    problem = build_problem(A, b, cfg)
    rep = solve(problem, cfg)
    if rep.status == "failed" or not np.all(np.isfinite(rep.x)):
        print("solver failed: non-finite iterate", file=sys.stderr)
        return 2
    write_history(rep, args.out)
    if args.x_out:
        write_vector(rep.x, args.x_out)
    print(f"status {rep.status}  iterations {rep.iterations}  grad_calls {rep.grad_calls}  "
          f"F {rep.F:.12g}  gap {rep.gap:.3e}")
    return 0


def _cmd_demo(args) -> int:
    if args.n < 1 or args.m < 1 or not args.eps > 0 or args.mu < 0:
        raise InputError("demo: need n, m >= 1, eps > 0, mu >= 0")
    P = random_instance(args.n, args.m, args.mu, args.eps, seed=args.seed)
    print(f"instance n={P.n} m={P.m} nnz={P.A.nnz} mu={P.mu:g} eps={P.eps:g} "
          f"L={P.L:.6g} threshold={P.threshold:.3e} -> case {P.case}")
    t = time.perf_counter()
    x_ref = mirror_descent_reference(P, args.reference_iters)
    print(f"reference ({args.reference_iters} entropic gradient steps): F = {P.F(x_ref):.12g} "
          f"[{time.perf_counter() - t:.2f} s]")
    runs = [("a", solve_case_a)]
    if P.mu > 0 and P.n >= 3:
        runs.append(("b", solve_case_b))
    for case, fn in runs:
        Q = EntropyLsqProblem(P.A, P.b, P.mu, P.eps, case=case)
        t = time.perf_counter()
        rep = fn(Q)
        print(f"case {case}: status {rep.status}  iterations {rep.iterations}  "
              f"F = {Q.F(rep.x):.12g}  F - F_ref = {Q.F(rep.x) - P.F(x_ref):+.3e}  "
              f"[{time.perf_counter() - t:.2f} s]")
    return 0


def _cmd_benchmark(args) -> int:
    from .suites import UNIVERSAL_SUITE, format_sweep, sweep
    try:
        eps = [float(e) for e in args.eps.split(",")]
    except ValueError:
        raise InputError(f"benchmark: cannot parse --eps {args.eps!r}") from None
    if len(eps) < 2 or any(not e > 0 for e in eps):
        raise InputError("benchmark: need at least two positive eps values")
    if args.suite != "universal":
        raise InputError(f"benchmark: unknown suite {args.suite!r}")
    for name, make in UNIVERSAL_SUITE.items():
        rows, fit = sweep(make, eps, delta_rule=args.delta_rule)
        print(format_sweep(f"{args.suite} {name}", rows, fit))
    return 0


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest
    return 0 if run_selftest() else 2


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fgmkit", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="solve an entropy least-squares problem from files")
    s.add_argument("--matrix", required=True)
    s.add_argument("--rhs", required=True)
    s.add_argument("--config")
    s.add_argument("--out", required=True, help="history CSV")
    s.add_argument("--x-out", help="write the final point as a vector file")
    s.set_defaults(func=_cmd_solve)
    d = sub.add_parser("demo-entropy-lsq", help="seeded random entropy least-squares instance")
    d.add_argument("--n", type=int, default=10)
    d.add_argument("--m", type=int, default=5)
    d.add_argument("--mu", type=float, default=0.1)
    d.add_argument("--eps", type=float, default=1e-5)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--reference-iters", type=int, default=100_000)
    d.set_defaults(func=_cmd_demo)
    b = sub.add_parser("benchmark", help="eps sweep with log-log slope fit")
    b.add_argument("--suite", default="universal")
    b.add_argument("--eps", default="1e-1,1e-2,1e-3,1e-4")
    b.add_argument("--delta-rule", default="precise", choices=DELTA_RULES)
    b.set_defaults(func=_cmd_benchmark)
    t = sub.add_parser("selftest", help="fast invariant checks")
    t.set_defaults(func=_cmd_selftest)
    return ap


def run(argv: Optional[Sequence[str]] = None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (BacktrackError, ArithmeticError, RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
