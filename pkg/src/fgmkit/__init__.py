"""Composite fast gradient methods with inexact, universal, restarted and mini-batch variants."""
from .core import (Box, Composite, CompositeProblem, FirstOrderOracle, HolderClass, InexactOracle,
                   InexactOracleOutput, Simplex, WholeSpace, delta_schedule, effective_L,
                   holder_power_oracle, quadratic_oracle, verify_dl_oracle,
                   wrap_holder_as_inexact)
from .entropy_lsq import EntropyLsqProblem, solve_case_a, solve_case_b
from .fgm import dual_certificate, fgm_solve, fgm_step, next_alpha_tau
from .prox import EntropySetup, EuclideanSetup, PowerNormSetup, grad_step, mirror_step
from .report import RunReport
from .restart import grad_mapping_norm, regularize, restart_solve
from .stochastic import StochasticOracle, batched_gradient, batch_size, stochastic_fgm_solve
from .universal import backtrack, universal_solve

__all__ = [
    "Box", "Composite", "CompositeProblem", "FirstOrderOracle", "HolderClass", "InexactOracle",
    "InexactOracleOutput", "Simplex", "WholeSpace", "delta_schedule", "effective_L",
    "holder_power_oracle", "quadratic_oracle", "verify_dl_oracle", "wrap_holder_as_inexact",
    "EntropyLsqProblem", "solve_case_a", "solve_case_b", "dual_certificate", "fgm_solve",
    "fgm_step", "next_alpha_tau", "EntropySetup", "EuclideanSetup", "PowerNormSetup",
    "grad_step", "mirror_step", "RunReport", "grad_mapping_norm", "regularize",
    "restart_solve", "StochasticOracle", "batched_gradient", "batch_size",
    "stochastic_fgm_solve", "backtrack", "universal_solve",
]
