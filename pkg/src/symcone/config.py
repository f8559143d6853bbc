"""Run configuration shared by the solvers and the CLI."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass
class RunConfig:
    problem: str = ""
    eps: float = 0.01
    delta: float = 1e-4
    patience: int = 10
    seed: int = 0
    threads: int = 1
    iteration_cap_override: int | None = None
    early_stop: bool = True

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must be in (0, 1)")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
