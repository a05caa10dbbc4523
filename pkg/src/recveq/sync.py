"""Search for a synchronizing unrolling of two recursive functions.

Each side is instrumented so that every frame below the root may stop
and record its arguments instead of running.  A bounded model search
then looks for an input and a choice of stopping frames under which the
two recorded argument sets coincide; the frames that ran become the
expanded nodes of the unrolling trees.
"""
from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence, Tuple

from .backend.encode import Counterexample, Inconclusive, encode, nondet_name, replayer
from .backend.solve import Formula, solve
from .backend.terms import free_vars as term_vars
from .config import DEFAULT, Config
from .errors import ArityMismatch, BudgetExceeded, InconsistentWitness
from .lang.ast import (Assert, Assume, Binary, Block, Call, Expr, ExprStmt, FunctionDef, If,
                       IntLit, Return, SourceUnit, Unary, Var, calls_in, conj, free_vars,
                       map_stmt_exprs, negate, renumber_calls, substitute)
from .lang.check import recursive_call_sites
from .oracle import COIN, LEAVES_DIFFER, RECORD, SIZE, Interpreter
from .pathex import PathPredicate
from .transforms import LEAF, MAIN, Expand, SyncUnrolling, Tree, normalize

DEPTH = "__rv_D"
SITE = "__rv_Site"
SIDE_NAMES = ("__rv_sync1", "__rv_sync2")


# -- program construction ---------------------------------------------------------------

@dataclass(frozen=True)
class SyncProgram:
    unit: SourceUnit
    inputs: Tuple[str, ...]
    # per side: call-site ordinal of each recursive call -> its site index
    site_index: Tuple[Dict[int, int], Dict[int, int]]
    arity: Tuple[int, int]
    recorded: Tuple[int, ...]


def recorded_positions(f1: FunctionDef, f2: FunctionDef, rho1: PathPredicate,
                       rho2: PathPredicate) -> Tuple[int, ...]:
    """Argument positions the leaves record: those the base-case conditions read."""
    used = free_vars(rho1.expr)
    pos = {i for i, p in enumerate(f1.params) if p in used}
    used2 = free_vars(rho2.expr)
    pos |= {i for i, p in enumerate(f2.params) if p in used2}
    return tuple(sorted(pos)) if pos else tuple(range(len(f1.params)))


def _instrument(f: FunctionDef, side: int, rho: PathPredicate, recorded: Sequence[int]):
    name = SIDE_NAMES[side - 1]
    order = {id(c): k for k, c in enumerate(c for c in calls_in(f) if c.name == f.name)}

    def rewrite(e):
        if isinstance(e, Call):
            args = tuple(rewrite(a) for a in e.args)
            if e.name == f.name:
                k = order[id(e)]
                return replace(e, name=name,
                               args=args + (Binary("+", Var(DEPTH), IntLit(1)), IntLit(k)))
            return replace(e, args=args)
        if isinstance(e, Unary):
            return replace(e, operand=rewrite(e.operand))
        if isinstance(e, Binary):
            return replace(e, left=rewrite(e.left), right=rewrite(e.right))
        return e

    body = map_stmt_exprs(f.body, rewrite)
    stop = If(Binary("&&", Binary(">", Var(DEPTH), IntLit(0)), Call(COIN, ())),
              Block((ExprStmt(Call(RECORD[side - 1], (Var(DEPTH), Var(SITE))
                                   + tuple(Var(f.params[i]) for i in recorded))),
                     Return(Unary("-", IntLit(1))))))
    pre = []
    block = negate(rho.expr)
    if block != IntLit(1):
        pre.append(Assume(block, marked=True))
    g = FunctionDef(name, f.params + (DEPTH, SITE), Block(tuple(pre) + (stop,) + body.stmts),
                    pos=f.pos)
    g = renumber_calls(g)
    k = 0
    index = {}
    for c in calls_in(g):
        if c.name == name:
            index[c.site] = k
            k += 1
    return g, index


def build_sync_program(f1: FunctionDef, f2: FunctionDef, rho1: PathPredicate, rho2: PathPredicate,
                       restrict1: Optional[Expr] = None, restrict2: Optional[Expr] = None,
                       strict_size_guard: bool = False,
                       context: Optional[SourceUnit] = None) -> SyncProgram:
    """The recording program whose counterexamples are synchronizing unrollings.

    ``restrict_i`` (over ``f_i``'s own parameters) limits the shared
    top-level input, as the path restriction of a multi-path proof does.
    ``context`` supplies the helpers and UF prototypes both sides call.
    """
    if len(f1.params) != len(f2.params):
        raise ArityMismatch(f2.name, f"{len(f1.params)} vs {len(f2.params)} parameters")
    recorded = recorded_positions(f1, f2, rho1, rho2)
    g1, idx1 = _instrument(f1, 1, rho1, recorded)
    g2, idx2 = _instrument(f2, 2, rho2, recorded)
    inputs = tuple(f1.params)
    args = tuple(Var(p) for p in inputs)
    stmts = []
    if restrict1 is not None and restrict1 != IntLit(1):
        stmts.append(Assume(restrict1))
    if restrict2 is not None and restrict2 != IntLit(1):
        stmts.append(Assume(substitute(restrict2, dict(zip(f2.params, args)))))
    top = (IntLit(0), Unary("-", IntLit(1)))
    stmts.append(ExprStmt(Call(g1.name, args + top)))
    stmts.append(ExprStmt(Call(g2.name, args + top)))
    op = ">" if strict_size_guard else ">="
    stmts.append(Assume(conj([Binary(op, Call(SIZE[0], ()), IntLit(1)),
                              Binary(op, Call(SIZE[1], ()), IntLit(1))])))
    stmts.append(Assert(Call(LEAVES_DIFFER, ())))
    stmts.append(Return(IntLit(0)))
    main = renumber_calls(FunctionDef(MAIN, inputs, Block(tuple(stmts))))
    extra = context or SourceUnit((), ())
    unit = SourceUnit((main, g1, g2) + tuple(extra.functions), tuple(extra.externs))
    return SyncProgram(unit, inputs, (idx1, idx2),
                       (len(recursive_call_sites(f1)), len(recursive_call_sites(f2))), recorded)


# -- witnesses and trees ----------------------------------------------------------------

@dataclass(frozen=True)
class LeafRecord:
    depth: int
    site: int
    args: Tuple[int, ...]
    path: Tuple[int, ...]     # site indices from the root


@dataclass(frozen=True)
class SyncWitness:
    input: Tuple[int, ...]
    records: Tuple[Tuple[LeafRecord, ...], Tuple[LeafRecord, ...]]
    # frames that ran instead of recording: site path -> recorded-position arguments
    expanded: Tuple[Dict[Tuple[int, ...], Tuple[int, ...]], Dict[Tuple[int, ...], Tuple[int, ...]]]

    def leaf_set(self, side: int) -> set:
        return {r.args for r in self.records[side - 1]}

    def leaf_multiset(self, side: int) -> Counter:
        return Counter(r.args for r in self.records[side - 1])


def _tree(records: Sequence[LeafRecord], expanded, c: int) -> Tree:
    leaves = set()
    for r in records:
        if r.depth != len(r.path) or (r.path and r.site != r.path[-1]):
            raise InconsistentWitness(f"record at depth {r.depth} with site path {r.path}")
        if r.depth == 0:
            raise InconsistentWitness("the root frame recorded")
        if any(not 0 <= k < c for k in r.path):
            raise InconsistentWitness(f"site path {r.path} out of range for {c} call sites")
        if r.path in leaves:
            raise InconsistentWitness(f"two records at site path {r.path}")
        leaves.add(r.path)
    inner = set(expanded)
    for p in leaves:
        for i in range(len(p)):
            if p[:i] not in inner:
                raise InconsistentWitness(f"record at {p} below a frame that never ran")
        if p in inner:
            raise InconsistentWitness(f"frame {p} both recorded and ran")

    def build(path):
        if path not in inner:
            return LEAF
        return Expand(tuple(build(path + (k,)) for k in range(c)))

    return build(())


def generate_sync_unrolling(w: SyncWitness, c1: int, c2: int) -> SyncUnrolling:
    """Pruned call trees from a witness: frames that ran are expanded."""
    return SyncUnrolling(normalize(_tree(w.records[0], w.expanded[0], c1)),
                         normalize(_tree(w.records[1], w.expanded[1], c2)))


def prune_witness(w: SyncWitness) -> SyncWitness:
    """Turn expanded frames whose children all recorded back into leaves while
    the two leaf multisets stay equal."""
    recs = [list(w.records[0]), list(w.records[1])]
    exp = [dict(w.expanded[0]), dict(w.expanded[1])]
    changed = True
    while changed:
        changed = False
        for s in (0, 1):
            for path in sorted(exp[s], key=lambda p: (-len(p), p)):
                if not path:
                    continue
                kids = [r for r in recs[s] if r.path[:-1] == path]
                if any(q != path and q[:len(path)] == path for q in exp[s]):
                    continue
                trial = [r for r in recs[s] if r.path[:-1] != path]
                trial.append(LeafRecord(len(path), path[-1], exp[s][path], path))
                other = Counter(r.args for r in recs[1 - s])
                if Counter(r.args for r in trial) == other and kids:
                    recs[s] = trial
                    del exp[s][path]
                    changed = True
                    break
    key = lambda r: r.path
    return SyncWitness(w.input, (tuple(sorted(recs[0], key=key)), tuple(sorted(recs[1], key=key))),
                       (exp[0], exp[1]))


def replay_witness(prog: SyncProgram, model, width: int, fuel: int) -> SyncWitness:
    """Run the recording program on a model and read off both recording patterns."""
    interp = Interpreter(prog.unit, width, nondet=lambda key: model[nondet_name(key)])
    args = tuple(model[p] for p in prog.inputs)
    interp.run(MAIN, args, fuel=fuel, trace=True)
    out_recs, out_exp = [], []
    for side in (1, 2):
        idx = prog.site_index[side - 1]
        name = SIDE_NAMES[side - 1]
        to_k = lambda path: tuple(idx[s] for s in path[1:])
        recs = [LeafRecord(r.depth, r.site, r.args, to_k(r.path)) for r in interp.records[side]]
        done = {r.path for r in recs}
        exp = {}
        for fr in interp.trace:
            if fr.name == name:
                k = to_k(fr.path)
                if k not in done:
                    exp[k] = tuple(fr.args[i] for i in prog.recorded)
        out_recs.append(tuple(recs))
        out_exp.append(exp)
    return SyncWitness(args, (out_recs[0], out_recs[1]), (out_exp[0], out_exp[1]))


# -- the search --------------------------------------------------------------------------

@dataclass(frozen=True)
class NotFound:
    reason: str               # "BudgetExhausted" | "ProvedImpossibleUpTo"
    uw: int = 0
    detail: str = ""


@dataclass(frozen=True)
class SyncFound:
    su: SyncUnrolling
    witness: SyncWitness
    uw: int


def find_sync_unrolling(f1: FunctionDef, f2: FunctionDef, rho1: PathPredicate,
                        rho2: PathPredicate, config: Config = DEFAULT,
                        restrict1: Optional[Expr] = None, restrict2: Optional[Expr] = None,
                        context: Optional[SourceUnit] = None):
    """Increase the unwinding until the recording program has a counterexample."""
    prog = build_sync_program(f1, f2, rho1, rho2, restrict1, restrict2, config.strict_size_guard,
                              context)
    if config.uw_max < 1:
        return NotFound("BudgetExhausted", 0, "uw_max is 0")
    deadline = time.monotonic() + config.sync_budget
    for uw in range(1, config.uw_max + 1):
        left = deadline - time.monotonic()
        if left <= 0:
            return NotFound("BudgetExhausted", uw - 1, "sync budget spent")
        cfg = config.with_(solver_timeout=min(config.solver_timeout, left))
        r = _search(prog, cfg, uw)
        if isinstance(r, Inconclusive):
            return NotFound("BudgetExhausted", uw - 1, r.reason)
        if isinstance(r, Counterexample):
            w = replay_witness(prog, r.model, config.width, fuel=1 << 30)
            if w.leaf_multiset(1) != w.leaf_multiset(2):
                raise InconsistentWitness("replayed leaf multisets differ")
            w = prune_witness(w)
            su = generate_sync_unrolling(w, *prog.arity)
            return SyncFound(su, w, uw)
    return NotFound("ProvedImpossibleUpTo", config.uw_max)


def _search(prog: SyncProgram, config: Config, uw: int):
    try:
        enc = encode(prog.unit, MAIN, prog.inputs, config.width, uw, config.step_bound)
    except BudgetExceeded as exc:
        return Inconclusive(str(exc))
    coins = sorted((v.val for v in term_vars(list(enc.violation())) if v.val.startswith("nd:")),
                   key=lambda n: tuple(int(x) for x in n[3:].split(".")))
    formula = Formula.of(*enc.violation(), var_order=tuple(prog.inputs) + tuple(coins),
                         prefer_true=coins, label=f"sync uw={uw}")
    replay = replayer(prog.unit, MAIN, config.width, fuel=enc.frames + 1)
    try:
        r = solve(formula, config=config, replay=lambda m: replay(m, prog.inputs))
    except BudgetExceeded as exc:
        return Inconclusive(str(exc))
    if not r.sat:
        return None
    if not replay(r.model, prog.inputs):
        return Inconclusive(f"sync model at uw={uw} did not replay")
    return Counterexample(r.model, tuple(r.model[p] for p in prog.inputs))
