from __future__ import annotations

import os
from dataclasses import dataclass, replace
from typing import Optional


@dataclass(frozen=True)
class Config:
    """Knobs shared by every stage of the pipeline.

    ``engine`` is one of ``"auto"``, ``"enumerate"`` or ``"satcore"``; auto
    picks exhaustive enumeration iff the query has at most
    ``enumerate_max_bits`` free bits.
    """
    width: int = 8
    uw_max: int = 6
    depth_bound: int = 16
    path_bound: int = 4096
    # total frames a symbolic exploration may enter before giving up
    step_bound: int = 200_000
    solver_timeout: float = 10.0
    conflict_limit: int = 200_000
    sync_budget: float = 60.0
    strict_size_guard: bool = False
    engine: str = "auto"
    enumerate_max_bits: int = 24
    oracle_fuel: int = 256
    refute_sweep: bool = True
    # seconds the refutation sweep may spend per pair
    sweep_budget: float = 20.0
    dump_dir: Optional[str] = None
    # every solver query is also written here as SMT-LIB / DIMACS text
    emit_smt: Optional[str] = None
    emit_cnf: Optional[str] = None
    jobs: int = 1

    def __post_init__(self):
        if not 2 <= self.width <= 64:
            raise ValueError(f"width must be in [2, 64], got {self.width}")
        for name in ("depth_bound", "path_bound", "step_bound", "oracle_fuel", "jobs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.uw_max < 0:
            raise ValueError("uw_max must be non-negative")
        if self.engine not in ("auto", "enumerate", "satcore"):
            raise ValueError(f"unknown engine {self.engine!r}")

    def with_(self, **kw) -> "Config":
        return replace(self, **kw)

    @classmethod
    def from_env(cls, **kw) -> "Config":
        if "dump_dir" not in kw and os.environ.get("RECVEQ_DUMP"):
            kw["dump_dir"] = os.environ["RECVEQ_DUMP"]
        return cls(**kw)


DEFAULT = Config()
