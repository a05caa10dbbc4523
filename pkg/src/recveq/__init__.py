"""Partial-equivalence checking for pairs of recursive functions."""
from .config import DEFAULT, Config
from .errors import RecveqError
from .lang import load, parse, pretty
from .oracle import Interpreter, brute_force_equiv
from .pathex import get_all_paths, natural_base_case_precondition, symexec_equiv
from .prover import (Equivalent, Inconclusive, NotEquivalent, NotProven, PairMapping,
                     ProofOutcome, Side, check_pair_feasible, prove_full_part_eq,
                     prove_part_eq_basic, prove_path_base_equiv, prove_path_step_equiv,
                     prove_programs)
from .sync import find_sync_unrolling
from .transforms import SyncUnrolling, apply_unrolling

__all__ = ["DEFAULT", "Config", "RecveqError", "load", "parse", "pretty", "Interpreter",
           "brute_force_equiv", "get_all_paths", "natural_base_case_precondition",
           "symexec_equiv", "Equivalent", "Inconclusive", "NotEquivalent", "NotProven",
           "PairMapping", "ProofOutcome", "Side", "check_pair_feasible", "prove_full_part_eq",
           "prove_part_eq_basic", "prove_path_base_equiv", "prove_path_step_equiv",
           "prove_programs", "find_sync_unrolling", "SyncUnrolling", "apply_unrolling"]
