"""Decision procedures: terms, the bit-level SAT core, enumeration and program encoding."""
from .encode import (Counterexample, Encoding, Inconclusive, Valid, check_valid, encode,
                     nondet_name, unwind)
from .smtlib import emit_smtlib
from .solve import (Formula, Model, QueryRecord, Sat, Unsat, free_bit_count, model_satisfies,
                    recording, solve)

__all__ = ["Counterexample", "Encoding", "Inconclusive", "Valid", "check_valid", "encode",
           "nondet_name", "unwind", "emit_smtlib", "Formula", "Model", "QueryRecord", "Sat",
           "Unsat", "free_bit_count", "model_satisfies", "recording", "solve"]
