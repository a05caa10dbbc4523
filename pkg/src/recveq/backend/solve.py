"""Formulas, models and the two decision engines behind one entry point."""
from __future__ import annotations

import contextlib
import itertools
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..config import DEFAULT, Config
from ..errors import BudgetExceeded
from .bitblast import BitBlaster
from .enumerate import enumerate_first, var_bits
from .smtlib import emit_smtlib
from .terms import (BOOL, TRUE, Term, all_, eq, evaluate, free_vars, implies, substitute,
                    uf_apps, var)


@dataclass(frozen=True)
class Formula:
    """A conjunction of boolean constraints; SAT means a model exists.

    ``var_order`` lists preferred variables (normally the program inputs)
    that lead the deterministic model order of both engines; booleans
    named in ``prefer_true`` try true before false.
    """
    constraints: Tuple[Term, ...]
    var_order: Tuple[str, ...] = ()
    label: str = ""
    prefer_true: frozenset = frozenset()

    @staticmethod
    def of(*constraints: Term, var_order=(), label="", prefer_true=()) -> "Formula":
        return Formula(tuple(constraints), tuple(var_order), label, frozenset(prefer_true))


@dataclass
class Model:
    values: Dict[str, object]
    ufs: Dict[Tuple[str, Tuple[int, ...]], int] = field(default_factory=dict)

    def __getitem__(self, name):
        return self.values.get(name, 0)

    def uf(self, name: str, args: Tuple[int, ...]) -> int:
        return self.ufs.get((name, tuple(args)), 0)


@dataclass(frozen=True)
class Sat:
    model: Model

    @property
    def sat(self):
        return True


@dataclass(frozen=True)
class Unsat:
    @property
    def sat(self):
        return False


# -- Ackermann reduction -----------------------------------------------------------

@dataclass
class Ackermannized:
    constraints: List[Term]
    # (symbol, argument terms over plain variables, result variable)
    apps: List[Tuple[str, Tuple[Term, ...], Term]]


def ackermannize(constraints: Sequence[Term]) -> Ackermannized:
    """Replace UF applications by fresh variables plus congruence constraints.

    Applications with identical argument terms are already the same
    hash-consed node, so they share one result variable for free.
    """
    apps = uf_apps(constraints)
    if not apps:
        return Ackermannized(list(constraints), [])
    mapping = {}
    counters: Dict[str, int] = {}
    for a in apps:
        k = counters.get(a.val, 0)
        counters[a.val] = k + 1
        mapping[a.id] = var(f"{a.val}#{k}", a.width)
    flat_args = [x for a in apps for x in a.args]
    rewritten = substitute(list(constraints) + flat_args, mapping)
    out = rewritten[:len(constraints)]
    args_iter = iter(rewritten[len(constraints):])
    table = []
    for a in apps:
        table.append((a.val, tuple(next(args_iter) for _ in a.args), mapping[a.id]))
    for (n1, x1, r1), (n2, x2, r2) in itertools.combinations(table, 2):
        if n1 != n2:
            continue
        same = all_(eq(p, q) for p, q in zip(x1, x2))
        c = implies(same, eq(r1, r2))
        if c is not TRUE:
            out.append(c)
    return Ackermannized(out, table)


def ordered_vars(constraints: Sequence[Term], preferred: Sequence[str]) -> List[Term]:
    present = {t.val: t for t in free_vars(constraints)}
    head = [present.pop(n) for n in preferred if n in present]
    return head + [present[n] for n in sorted(present)]


def free_bit_count(formula: Formula) -> int:
    ack = ackermannize(formula.constraints)
    return sum(var_bits(v) for v in free_vars(ack.constraints))


def _complete_model(values: Dict[str, object], ack: Ackermannized, preferred) -> Model:
    for name in preferred:
        values.setdefault(name, 0)
    ufs = {}
    if ack.apps:
        env = {k: v for k, v in values.items()}
        args = [x for _, xs, _ in ack.apps for x in xs]
        vals = evaluate(args, {k: (np.bool_(v) if isinstance(v, bool) else np.int64(v))
                               for k, v in env.items()})
        it = iter(vals)
        for name, xs, r in ack.apps:
            key = (name, tuple(int(next(it)) for _ in xs))
            ufs.setdefault(key, int(values.get(r.val, 0)))
    return Model(values, ufs)


# -- engines ------------------------------------------------------------------------

def _solve_enumerate(formula: Formula, ack: Ackermannized) -> object:
    variables = ordered_vars(ack.constraints, formula.var_order)
    found = enumerate_first(ack.constraints, variables, flipped=formula.prefer_true)
    if found is None:
        return Unsat()
    return Sat(_complete_model(found, ack, formula.var_order))


def _zigzag_bits(bb: BitBlaster, bits: List[int]) -> List[int]:
    """Literals of the zigzag code of a signed word, most significant first."""
    s = bits[-1]
    code = [s] + [bb.XOR(b, s) for b in bits[:-1]]
    return list(reversed(code))


def _solve_satcore(formula: Formula, ack: Ackermannized, config: Config,
                   minimize: bool = True, cnf_path: Optional[str] = None) -> object:
    bb = BitBlaster(keep_clauses=cnf_path is not None)
    for c in ack.constraints:
        bb.assert_(c)
    variables = ordered_vars(ack.constraints, formula.var_order)
    order_lits: List[int] = []
    for v in variables:
        bits = bb.blast(v)
        if minimize and v.val in formula.var_order:
            # gates for the zigzag code must exist before the first solve
            if v.width != BOOL:
                order_lits += _zigzag_bits(bb, bits)
            else:
                order_lits.append(-bits if v.val in formula.prefer_true else bits)
    if cnf_path is not None:
        with open(cnf_path, "w") as fh:
            fh.write(bb.dimacs())
    deadline = time.monotonic() + config.solver_timeout
    r = bb.s.solve(conflict_limit=config.conflict_limit, deadline=deadline)
    if r is None:
        raise BudgetExceeded(f"SAT core gave up on {formula.label or 'query'}")
    if not r:
        return Unsat()
    if minimize:
        # lexicographic minimization of the preferred variables' zigzag codes
        fixed: List[int] = []
        for lit in order_lits:
            if not bb.s.model_value(lit):
                fixed.append(-lit)
                continue
            r = bb.s.solve(fixed + [-lit], conflict_limit=config.conflict_limit,
                           deadline=deadline)
            if r is None:
                raise BudgetExceeded(f"SAT core gave up minimizing {formula.label or 'query'}")
            fixed.append(-lit if r else lit)
            if not r:
                # restore a model consistent with the fixed prefix
                bb.s.solve(fixed, conflict_limit=config.conflict_limit, deadline=deadline)
    values = {}
    for v in variables:
        bits = bb.vars[v.val]
        if v.width == BOOL:
            values[v.val] = bb.s.model_value(bits)
        else:
            u = sum(1 << i for i, b in enumerate(bits) if bb.s.model_value(b))
            values[v.val] = u - (1 << v.width) if u >> (v.width - 1) else u
    return Sat(_complete_model(values, ack, formula.var_order))


# -- query log ---------------------------------------------------------------------

@dataclass
class QueryRecord:
    formula: Formula
    engine: str
    result: object
    free_bits: int
    seconds: float
    # replays a model against the program the formula came from
    replay: Optional[Callable[[Model], bool]] = None


_logs: List[List[QueryRecord]] = []
_counter = itertools.count()


@contextlib.contextmanager
def recording():
    """Collect every query solved inside the block."""
    log: List[QueryRecord] = []
    _logs.append(log)
    try:
        yield log
    finally:
        _logs.remove(log)


def pick_engine(engine: str, bits: int, config: Config) -> str:
    if engine == "auto":
        return "enumerate" if bits <= config.enumerate_max_bits else "satcore"
    return engine


def solve(formula: Formula, engine: Optional[str] = None, config: Config = DEFAULT,
          replay: Optional[Callable[[Model], bool]] = None):
    """Decide ``formula``: ``Sat(model)`` or ``Unsat()``.

    Raises BudgetExceeded when the SAT core runs out of conflicts or time,
    and ValueError when the Enumerate engine is asked for a space larger
    than ``config.enumerate_max_bits``.
    """
    ack = ackermannize(formula.constraints)
    bits = sum(var_bits(v) for v in free_vars(ack.constraints))
    chosen = pick_engine(engine or config.engine, bits, config)
    qid = next(_counter)
    if config.emit_smt:
        os.makedirs(config.emit_smt, exist_ok=True)
        with open(os.path.join(config.emit_smt, f"q{qid:05d}.smt2"), "w") as fh:
            fh.write(f"; {formula.label}\n" + emit_smtlib(formula))
    cnf_path = None
    if config.emit_cnf:
        os.makedirs(config.emit_cnf, exist_ok=True)
        cnf_path = os.path.join(config.emit_cnf, f"q{qid:05d}.cnf")
    t0 = time.monotonic()
    if chosen == "enumerate":
        if bits > config.enumerate_max_bits:
            raise ValueError(f"{bits} free bits exceed the enumeration limit "
                             f"{config.enumerate_max_bits}")
        result = _solve_enumerate(formula, ack)
    elif chosen == "satcore":
        result = _solve_satcore(formula, ack, config, cnf_path=cnf_path)
    else:
        raise ValueError(f"unknown engine {chosen!r}")
    rec = QueryRecord(formula, chosen, result, bits, time.monotonic() - t0, replay)
    for log in _logs:
        log.append(rec)
    return result


def model_satisfies(formula: Formula, model: Model) -> bool:
    """Evaluate the formula itself (UFs read from the model's table)."""
    env = {k: (np.bool_(v) if isinstance(v, bool) else np.int64(v)) for k, v in model.values.items()}
    vals = evaluate(list(formula.constraints), env, ufs=model.uf)
    return all(bool(v) for v in vals)
