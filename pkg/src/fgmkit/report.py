"""Per-iteration run records shared by all solvers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

STATUSES = ("converged", "budget_exhausted", "failed")
HISTORY_HEADER = ("iter", "grad_calls", "fval_calls", "sample_calls", "F", "gap", "L_k",
                  "restart", "inner_iters", "ms")


@dataclass
class IterRecord:
    iter: int
    grad_calls: int
    fval_calls: int
    sample_calls: int
    F: float
    gap: float
    L_k: float
    restart: int
    inner_iters: int
    ms: float

    def row(self) -> tuple:
        return tuple(getattr(self, k) for k in HISTORY_HEADER)


@dataclass
class RunReport:
    records: list = field(default_factory=list)
    status: str = "converged"
    x: Optional[np.ndarray] = None
    x_best: Optional[np.ndarray] = None
    F_best: float = math.inf
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"bad status {self.status!r}")

    @property
    def iterations(self) -> int:
        return self.records[-1].iter if self.records else 0

    @property
    def final(self) -> Optional[IterRecord]:
        return self.records[-1] if self.records else None

    @property
    def F(self) -> float:
        return self.records[-1].F if self.records else math.nan

    @property
    def gap(self) -> float:
        return self.records[-1].gap if self.records else math.inf

    @property
    def grad_calls(self) -> int:
        return self.records[-1].grad_calls if self.records else 0

    @property
    def fval_calls(self) -> int:
        return self.records[-1].fval_calls if self.records else 0

    @property
    def sample_calls(self) -> int:
        return self.records[-1].sample_calls if self.records else 0

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate(self.column("F"))

    def evals_per_iteration(self) -> float:
        """Oracle evaluations of ``f`` (value-only plus value-with-gradient) per iteration."""
        it = self.iterations
        return (self.grad_calls + self.fval_calls) / it if it else math.nan
