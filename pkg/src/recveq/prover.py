"""Proof rules for partial equivalence of recursive functions.

``prove_part_eq_basic`` replaces the recursive calls of both sides by one
shared uninterpreted function and checks a single flat program.  When the
recursions are out of step, ``prove_full_part_eq`` splits the input space
by top-frame paths, finds a synchronizing unrolling for each path pair
and proves a base-case task (symbolic execution, recursion kept) and a
step task (leaf calls abstracted) per pair.  ``prove_programs`` drives
either rule bottom-up over two whole programs.
"""
from __future__ import annotations

import itertools
import os
import time
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

from . import pathex
from .backend.encode import Counterexample, Valid, check_valid
from .backend.encode import Inconclusive as Undecided
from .config import DEFAULT, Config
from .errors import ArityMismatch, NotFlat, PathBudgetExceeded, UndefinedCallee
from .lang.ast import (Assert, Assume, Binary, Block, Call, Expr, Extern, FunctionDef, IntLit,
                       Return, SourceUnit, Var, calls_in, renumber_calls, substitute)
from .lang.printer import pretty
from .oracle import DomainSpec, Interpreter, Value
from .pathex import (BaseCaseInfo, PathPredicate, base_case_precondition, get_all_paths,
                     natural_base_case_precondition, rename)
from .sync import NotFound, find_sync_unrolling
from .transforms import (BLOCK, MAIN, NO_UNROLLING, RET, UF, SyncUnrolling, apply_unrolling,
                         instrument_bc_flag, substitute_calls)
from .backend import terms as T

UF_SELF = "__rv_uf"


# -- verdicts ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Equivalent:
    def __str__(self):
        return "Equivalent"


@dataclass(frozen=True)
class NotEquivalent:
    input: Tuple[int, ...]
    v1: int
    v2: int

    def __str__(self):
        return f"NotEquivalent(input={list(self.input)}, {self.v1} != {self.v2})"


@dataclass(frozen=True)
class NotProven:
    reason: str
    detail: str = ""

    def __str__(self):
        return f"NotProven({self.reason})"


@dataclass(frozen=True)
class Inconclusive:
    bound: str

    def __str__(self):
        return f"Inconclusive({self.bound})"


Verdict = Union[Equivalent, NotEquivalent, NotProven, Inconclusive]


@dataclass
class PathPair:
    index: int
    pp1: str
    pp2: str
    feasible: bool
    su: Optional[SyncUnrolling] = None
    uw: int = 0
    base: str = ""
    step: str = ""


@dataclass
class ProofOutcome:
    verdict: Verdict
    evidence: List[Tuple[str, str]] = field(default_factory=list)
    strategy: str = ""
    su: Optional[SyncUnrolling] = None
    # diagnostic input from a failed premise; not a proof of inequivalence
    witness: Optional[Tuple[int, ...]] = None
    base_info: Optional[BaseCaseInfo] = None
    path_pairs: List[PathPair] = field(default_factory=list)

    @property
    def proven(self) -> bool:
        return isinstance(self.verdict, Equivalent)


# -- sides and tasks ----------------------------------------------------------------------

@dataclass(frozen=True)
class Side:
    """A function together with what it may call.

    ``ctx`` holds helper bodies and UF prototypes; ``concrete`` is an
    extern-free program containing ``f.name`` used to replay witnesses.
    """
    f: FunctionDef
    ctx: SourceUnit = SourceUnit()
    concrete: Optional[SourceUnit] = None
    # name of f inside ``concrete`` when renaming moved it
    entry: Optional[str] = None

    @property
    def functions(self) -> Tuple[FunctionDef, ...]:
        return (self.f,) + tuple(self.ctx.functions)

    def names(self) -> List[str]:
        return [g.name for g in self.functions] + [e.name for e in self.ctx.externs]


def as_side(x) -> Side:
    return x if isinstance(x, Side) else Side(x)


def _base(name: str) -> str:
    # unrolled clones of f are f_, f__, ...
    return name.rstrip("_")


def _rename_side(s: Side, renames: Dict[str, str]) -> Side:
    def fix(g):
        for old, new in renames.items():
            g = substitute_calls(g, {old}, UF(new))
        return replace(g, name=renames.get(g.name, g.name))

    ext = tuple(replace(e, name=renames.get(e.name, e.name)) for e in s.ctx.externs)
    return Side(fix(s.f), SourceUnit(tuple(fix(g) for g in s.ctx.functions), ext), s.concrete,
                s.entry or s.f.name)


def separate(s1: Side, s2: Side) -> Tuple[Side, Side]:
    """Rename side 2 so no name (or clone name) of it clashes with side 1.

    UF prototypes declared by both sides are shared on purpose and keep
    their names.
    """
    shared = {e.name for e in s1.ctx.externs} & {e.name for e in s2.ctx.externs}
    taken = {_base(n) for n in s1.names()} | {MAIN, RET, BLOCK, UF_SELF}
    renames = {}
    for n in s2.names():
        if n in shared:
            continue
        if _base(n) in taken:
            i = 2
            while _base(f"{n}_v{i}") in taken:
                i += 1
            renames[n] = f"{n}_v{i}"
        taken.add(_base(renames.get(n, n)))
    return (s1, _rename_side(s2, renames)) if renames else (s1, s2)


def _check_arity(f1: FunctionDef, f2: FunctionDef):
    if f1.arity != f2.arity:
        raise ArityMismatch(f2.name, f"{f1.name} takes {f1.arity} parameters, {f2.name} {f2.arity}")


def _on_side1(e: Expr, f2: FunctionDef, f1: FunctionDef) -> Expr:
    return substitute(e, {p: Var(q) for p, q in zip(f2.params, f1.params)})


def _task(s1: Side, s2: Side, funcs1, funcs2, assumes: Sequence[Expr], body, externs=()) -> SourceUnit:
    """A task program: both sides' functions plus a main over side 1's parameters."""
    stmts = tuple(Assume(a) for a in assumes if a != IntLit(1)) + tuple(body) + (Return(IntLit(0)),)
    main = renumber_calls(FunctionDef(MAIN, s1.f.params, Block(stmts)))
    ext = {}
    for e in tuple(s1.ctx.externs) + tuple(s2.ctx.externs) + tuple(externs):
        ext.setdefault(e.name, e)
    funcs = list(funcs1) + list(s1.ctx.functions) + list(funcs2) + list(s2.ctx.functions) + [main]
    return SourceUnit(tuple(funcs), tuple(ext.values()))


def _equal_outputs(s1: Side, n1: str, n2: str) -> Assert:
    args = tuple(Var(p) for p in s1.f.params)
    return Assert(Binary("==", Call(n1, args), Call(n2, args)))


def _restrictions(s1: Side, s2: Side, restrict) -> List[Expr]:
    r1, r2 = restrict or (None, None)
    out = []
    if r1 is not None:
        out.append(r1)
    if r2 is not None:
        out.append(_on_side1(r2, s2.f, s1.f))
    return out


def _show(r) -> str:
    if isinstance(r, Valid):
        return "Valid"
    if isinstance(r, Counterexample):
        return f"Counterexample(input={list(r.input)})"
    if isinstance(r, pathex.Proven):
        return f"Proven({r.paths} paths)"
    if isinstance(r, pathex.Refuted):
        return f"Refuted(input={list(r.input)})"
    if isinstance(r, (Undecided, pathex.Inconclusive)):
        return f"Inconclusive({r.reason})"
    return str(r)


def confirm_witness(s1: Side, s2: Side, args: Sequence[int], config: Config) -> Optional[NotEquivalent]:
    """Run both original functions on ``args``; a disagreement of terminating runs is a witness."""
    values = []
    for s in (s1, s2):
        if s.concrete is not None:
            unit, name = s.concrete, s.entry or s.f.name
        else:
            unit, name = SourceUnit(s.functions, s.ctx.externs), s.f.name
        if unit.externs:
            return None
        r = Interpreter(unit, config.width).run(name, list(args), fuel=config.oracle_fuel)
        if not isinstance(r, Value):
            return None
        values.append(r.value)
    if values[0] != values[1]:
        return NotEquivalent(tuple(args), values[0], values[1])
    return None


# -- single-task rules ------------------------------------------------------------------------

def _abstract_leaves(clones: Sequence[FunctionDef], entry: str) -> List[FunctionDef]:
    return [substitute_calls(g, {entry}, UF(UF_SELF)) for g in clones]


def step_task(s1: Side, s2: Side, su: SyncUnrolling, assumes: Sequence[Expr]) -> SourceUnit:
    c1 = _abstract_leaves(apply_unrolling(s1.f, su.side1), s1.f.name)
    c2 = _abstract_leaves(apply_unrolling(s2.f, su.side2), s2.f.name)
    uf = (Extern(UF_SELF, s1.f.arity),)
    return _task(s1, s2, c1, c2, assumes, [_equal_outputs(s1, s1.f.name, s2.f.name)], uf)


def dump(config: Config, label: str, unit: SourceUnit):
    """Write a task program under ``config.dump_dir`` (one file per task)."""
    if not config.dump_dir:
        return
    os.makedirs(config.dump_dir, exist_ok=True)
    name = "".join(c if c.isalnum() else "_" for c in label).strip("_")
    with open(os.path.join(config.dump_dir, f"{next(_dump_ids):04d}_{name}.mrc"), "w") as fh:
        fh.write(f"// {label}\n" + pretty(unit))


_dump_ids = itertools.count()


def _check(unit: SourceUnit, config: Config, label: str):
    dump(config, label, unit)
    try:
        return check_valid(unit, MAIN, unit.function(MAIN).params, config, label=label)
    except NotFlat as exc:
        return Undecided(f"helper recursion is not abstracted: {exc}")


def prove_part_eq_basic(f1, f2, config: Config = DEFAULT, restrict=None) -> ProofOutcome:
    """Both sides with self-calls replaced by one shared UF, checked as a flat program."""
    s1, s2 = separate(as_side(f1), as_side(f2))
    _check_arity(s1.f, s2.f)
    unit = step_task(s1, s2, NO_UNROLLING, _restrictions(s1, s2, restrict))
    r = _check(unit, config, f"part-eq {s1.f.name}/{s2.f.name}")
    out = ProofOutcome(Equivalent(), [("part-eq", _show(r))], strategy="part-eq")
    if isinstance(r, Counterexample):
        out.verdict = NotProven("PremiseFailed", "shared-UF abstraction admits a disagreement")
        out.witness = r.input
    elif isinstance(r, Undecided):
        out.verdict = Inconclusive(r.reason)
    return out


def check_pair_feasible(pp1: PathPredicate, pp2: PathPredicate, config: Config = DEFAULT,
                        externs: Sequence[Extern] = ()):
    """Do the two path conditions share an input?"""
    if pp1.term is T.FALSE or pp2.term is T.FALSE:
        return Infeasible()
    both = T.and_(pp1.term, rename(pp2, pp1.params).term)
    if both is T.FALSE:
        return Infeasible()
    params = pp1.params
    main = FunctionDef(MAIN, params, Block((Assume(pathex.term_to_expr(both)), Assert(IntLit(0)),
                                            Return(IntLit(0)))))
    unit = SourceUnit((renumber_calls(main),), tuple(externs))
    r = check_valid(unit, MAIN, params, config, label="path-pair feasibility")
    if isinstance(r, Valid):
        return Infeasible()
    # an undecided query keeps the pair: proving too much is safe
    return Feasible(r.input if isinstance(r, Counterexample) else None)


@dataclass(frozen=True)
class Feasible:
    input: Optional[Tuple[int, ...]] = None


@dataclass(frozen=True)
class Infeasible:
    pass


def base_case_info(f1, f2, su: SyncUnrolling, config: Config = DEFAULT,
                   rho1: Optional[PathPredicate] = None,
                   rho2: Optional[PathPredicate] = None) -> BaseCaseInfo:
    s1, s2 = as_side(f1), as_side(f2)
    rho1 = rho1 or natural_base_case_precondition(s1.f, config, SourceUnit(s1.functions, s1.ctx.externs))
    rho2 = rho2 or natural_base_case_precondition(s2.f, config, SourceUnit(s2.functions, s2.ctx.externs))
    bcpc = []
    for s, tree, rho in ((s1, su.side1, rho1), (s2, su.side2, rho2)):
        inst = instrument_bc_flag(apply_unrolling(s.f, tree), rho.expr)
        p = base_case_precondition(inst, config, externs=s.ctx.externs, helpers=s.ctx.functions)
        bcpc.append(PathPredicate(p.term, s.f.params))
    return BaseCaseInfo(rho1, rho2, bcpc[0], bcpc[1])


def prove_path_base_equiv(f1, f2, su: SyncUnrolling, config: Config = DEFAULT, restrict=None,
                          info: Optional[BaseCaseInfo] = None):
    """Equality on inputs that reach a base case inside the unrolling, recursion kept.

    Returns ``(outcome, info)``; ``info.ebcp`` is what the step task excludes.
    """
    s1, s2 = separate(as_side(f1), as_side(f2))
    _check_arity(s1.f, s2.f)
    try:
        info = info or base_case_info(s1, s2, su, config)
    except PathBudgetExceeded as exc:
        return ProofOutcome(Inconclusive(str(exc)), [("base", f"Inconclusive({exc})")]), None
    c1 = apply_unrolling(s1.f, su.side1)
    c2 = apply_unrolling(s2.f, su.side2)
    assumes = _restrictions(s1, s2, restrict) + [info.ebcp.expr]
    unit = _task(s1, s2, c1, c2, assumes, [_equal_outputs(s1, s1.f.name, s2.f.name)])
    dump(config, f"base {s1.f.name}/{s2.f.name}", unit)
    r = pathex.symexec_equiv(unit, MAIN, config)
    out = ProofOutcome(Equivalent(), [("base", _show(r))], base_info=info)
    if isinstance(r, pathex.Refuted):
        out.witness = r.input
        out.verdict = (confirm_witness(as_side(f1), as_side(f2), r.input, config)
                       or NotProven("BaseCaseFailed", "witness did not replay on the original programs"))
    elif isinstance(r, pathex.Inconclusive):
        out.verdict = Inconclusive(r.reason)
    return out, info


def prove_path_step_equiv(f1, f2, su: SyncUnrolling, ebcp: PathPredicate,
                          config: Config = DEFAULT, restrict=None) -> ProofOutcome:
    """Equality outside ``ebcp`` with the unrolling's leaf calls abstracted by a shared UF."""
    s1, s2 = separate(as_side(f1), as_side(f2))
    _check_arity(s1.f, s2.f)
    assumes = _restrictions(s1, s2, restrict) + [pathex.term_to_expr(T.not_(ebcp.term))]
    unit = step_task(s1, s2, su, assumes)
    r = _check(unit, config, f"step {s1.f.name}/{s2.f.name}")
    out = ProofOutcome(Equivalent(), [("step", _show(r))])
    if isinstance(r, Counterexample):
        out.verdict = NotProven("StepFailed", "leaf calls are not related by the unrolling")
        out.witness = r.input
    elif isinstance(r, Undecided):
        out.verdict = Inconclusive(r.reason)
    return out


# -- multi-path rule --------------------------------------------------------------------------

def _unit_of(s: Side) -> SourceUnit:
    return SourceUnit(s.functions, s.ctx.externs)


def _context(s1: Side, s2: Side) -> SourceUnit:
    ext = {}
    for e in tuple(s1.ctx.externs) + tuple(s2.ctx.externs):
        ext.setdefault(e.name, e)
    return SourceUnit(tuple(s1.ctx.functions) + tuple(s2.ctx.functions), tuple(ext.values()))


def _restricted(pp: PathPredicate, rho: PathPredicate) -> Expr:
    return pathex.term_to_expr(T.or_(pp.term, rho.term))


def prove_full_part_eq(f1, f2, config: Config = DEFAULT) -> ProofOutcome:
    """Path-split proof: one synchronizing unrolling, base task and step task per path pair.

    Every pair of top-frame paths is screened for a shared input; the
    feasible pairs of recursive paths are proved with both sides
    restricted to ``pp or rho`` so base-only inputs ride along.  A
    recursive path that meets no recursive path of the other side is
    paired with that side's base case alone, so pruning never drops
    inputs.
    """
    s1, s2 = separate(as_side(f1), as_side(f2))
    _check_arity(s1.f, s2.f)
    out = ProofOutcome(Equivalent(), strategy="full-part-eq")
    try:
        paths1 = get_all_paths(s1.f, config, _unit_of(s1))
        paths2 = get_all_paths(s2.f, config, _unit_of(s2))
        rho1 = natural_base_case_precondition(s1.f, config, _unit_of(s1))
        rho2 = natural_base_case_precondition(s2.f, config, _unit_of(s2))
    except PathBudgetExceeded as exc:
        out.verdict = Inconclusive(str(exc))
        return out
    out.evidence.append(("paths", f"{len(paths1)} x {len(paths2)}"))
    externs = _context(s1, s2).externs

    # screen the whole product; only recursive x recursive pairs need proofs,
    # inputs of base-only paths are covered by the rho disjuncts
    work = []
    covered1, covered2 = set(), set()
    for i, (a, b) in enumerate(itertools.product(paths1, paths2)):
        feas = check_pair_feasible(a, b, config, externs)
        ok = isinstance(feas, Feasible)
        out.evidence.append((f"feasibility #{i}", "Feasible" if ok else "Infeasible"))
        out.path_pairs.append(PathPair(i, str(a), str(b), ok))
        if ok and a.recursive and b.recursive:
            work.append((out.path_pairs[-1], a, b))
            covered1.add(id(a))
            covered2.add(id(b))
    # a recursive path meeting only base paths of the other side still needs a proof
    none1 = PathPredicate(T.FALSE, s1.f.params)
    none2 = PathPredicate(T.FALSE, s2.f.params)
    for a in paths1:
        if a.recursive and id(a) not in covered1:
            pair = PathPair(len(out.path_pairs), str(a), "base only", True)
            out.path_pairs.append(pair)
            work.append((pair, a, none2))
    for b in paths2:
        if b.recursive and id(b) not in covered2:
            pair = PathPair(len(out.path_pairs), "base only", str(b), True)
            out.path_pairs.append(pair)
            work.append((pair, none1, b))
    if not work:
        # neither side recurses on a shared input: one pair, both unrestricted
        true1, true2 = PathPredicate(T.TRUE, s1.f.params), PathPredicate(T.TRUE, s2.f.params)
        pair = PathPair(len(out.path_pairs), "true", "true", True)
        out.path_pairs.append(pair)
        work.append((pair, true1, true2))

    capped: Optional[Verdict] = None
    for pair, a, b in work:
        restrict = (_restricted(a, rho1), _restricted(b, rho2))
        tag = f"#{pair.index}"
        if a.recursive and b.recursive:
            found = find_sync_unrolling(s1.f, s2.f, rho1, rho2, config, *restrict,
                                        context=_context(s1, s2))
            if isinstance(found, NotFound):
                out.evidence.append((f"sync {tag}", f"NotFound({found.reason}, uw={found.uw})"))
                out.verdict = NotProven("SyncUnrollingNotFound", found.detail)
                return out
            su, pair.uw = found.su, found.uw
            out.evidence.append((f"sync {tag}", f"uw={found.uw} {su}"))
        else:
            su = NO_UNROLLING
        pair.su = su
        try:
            info = base_case_info(s1, s2, su, config, rho1, rho2)
        except PathBudgetExceeded as exc:
            info = None
            base = ProofOutcome(Inconclusive(str(exc)), [("base", f"Inconclusive({exc})")])
        else:
            base, _ = prove_path_base_equiv(s1, s2, su, config, restrict, info)
        pair.base = base.evidence[-1][1]
        out.evidence.append((f"base {tag}", pair.base))
        if isinstance(base.verdict, (NotEquivalent, NotProven)):
            out.verdict, out.witness = base.verdict, base.witness
            return out
        if isinstance(base.verdict, Inconclusive):
            capped = capped or base.verdict
        if info is None:
            continue
        step = prove_path_step_equiv(s1, s2, su, info.ebcp, config, restrict)
        pair.step = step.evidence[-1][1]
        out.evidence.append((f"step {tag}", pair.step))
        if isinstance(step.verdict, NotProven):
            out.verdict, out.witness = step.verdict, step.witness
            return out
        if isinstance(step.verdict, Inconclusive):
            capped = capped or step.verdict
        out.base_info = out.base_info or info
    if len(work) == 1:
        out.su = work[0][0].su
    out.verdict = capped or Equivalent()
    return out


# -- whole programs ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairMapping:
    pairs: Tuple[Tuple[str, str], ...]

    @staticmethod
    def parse(specs: Sequence[str]) -> "PairMapping":
        out = []
        for s in specs:
            a, sep, b = s.partition(":")
            if not sep or not a or not b:
                raise ValueError(f"pair must look like name1:name2, got {s!r}")
            out.append((a, b))
        return PairMapping(tuple(out))


@dataclass
class PairReport:
    names: Tuple[str, str]
    outcome: ProofOutcome
    seconds: float

    def to_json(self) -> dict:
        o = self.outcome
        d = {"names": list(self.names), "verdict": str(o.verdict), "strategy": o.strategy,
             "su": None, "path_pairs": [], "evidence": [list(e) for e in o.evidence],
             "timings": {"total": round(self.seconds, 3)}}
        f1, f2 = self.names
        if o.su is not None:
            d["su"] = {"side1": repr(o.su.side1), "side2": repr(o.su.side2)}
        for p in o.path_pairs:
            d["path_pairs"].append({"index": p.index, "pp1": p.pp1, "pp2": p.pp2,
                                    "feasible": p.feasible,
                                    "su": None if p.su is None else repr(p.su),
                                    "base": p.base, "step": p.step})
        if isinstance(o.verdict, NotEquivalent):
            d["witness"] = {"input": list(o.verdict.input), "v1": o.verdict.v1, "v2": o.verdict.v2}
        elif o.witness is not None:
            d["diagnostic_input"] = list(o.witness)
        return d


@dataclass
class EquivalenceReport:
    pairs: List[PairReport]

    def get(self, n1: str, n2: str) -> PairReport:
        for p in self.pairs:
            if p.names == (n1, n2):
                return p
        raise KeyError((n1, n2))

    def to_json(self) -> dict:
        return {"schema": 1, "pairs": [p.to_json() for p in self.pairs]}

    def table(self) -> str:
        rows = [("pair", "verdict", "strategy", "time")]
        for p in self.pairs:
            rows.append((f"{p.names[0]}/{p.names[1]}", str(p.outcome.verdict),
                         p.outcome.strategy or "-", f"{p.seconds:.2f}s"))
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def _callees(unit: SourceUnit, name: str, stop=frozenset()) -> List[str]:
    """Functions reachable from ``name`` (excluded), not looking inside ``stop``."""
    funcs = {f.name: f for f in unit.functions}
    seen, order, todo = {name}, [], [name]
    while todo:
        n = todo.pop()
        if n in stop and n != name:
            continue
        for c in calls_in(funcs[n]):
            if c.name in funcs and c.name not in seen:
                seen.add(c.name)
                order.append(c.name)
                todo.append(c.name)
    return order


def _bottom_up(unit: SourceUnit, pairs: Sequence[Tuple[str, str]]) -> List[Tuple[str, str]]:
    done, out = set(), []

    def visit(p, active):
        if p in done:
            return
        active = active | {p}
        below = set(_callees(unit, p[0]))
        for q in pairs:
            if q[0] in below and q not in active:
                visit(q, active)
        done.add(p)
        out.append(p)

    for p in pairs:
        visit(p, frozenset())
    return out


def _uf_symbol(pair: Tuple[str, str]) -> str:
    return f"{UF_SELF}_{pair[0]}_{pair[1]}"


def _side_for(unit: SourceUnit, name: str, proven: Dict[str, str], externs: Sequence[Extern]) -> Side:
    """``name`` with calls to proven callees replaced by their shared UF symbols."""
    def abstract(g):
        for callee, sym in proven.items():
            g = substitute_calls(g, {callee}, UF(sym))
        return g

    helpers = [abstract(unit.function(n)) for n in _callees(unit, name, frozenset(proven))
               if n not in proven]
    ext = list(unit.externs) + [e for e in externs if any(e.name == s for s in proven.values())]
    return Side(abstract(unit.function(name)), SourceUnit(tuple(helpers), tuple(ext)), unit, name)


def refute_sweep(u1: SourceUnit, n1: str, u2: SourceUnit, n2: str,
                 config: Config = DEFAULT) -> Optional[NotEquivalent]:
    """Look for a terminating disagreement over the whole input domain, within the sweep budget."""
    if u1.externs or u2.externs:
        return None
    f1, f2 = u1.function(n1), u2.function(n2)
    if f1.arity != f2.arity:
        return None
    i1, i2 = Interpreter(u1, config.width), Interpreter(u2, config.width)
    deadline = time.monotonic() + config.sweep_budget
    for k, x in enumerate(DomainSpec(width=config.width).inputs(f1.arity)):
        if k % 256 == 0 and time.monotonic() > deadline:
            return None
        r1 = i1.run(n1, x, config.oracle_fuel)
        if not isinstance(r1, Value):
            continue
        r2 = i2.run(n2, x, config.oracle_fuel)
        if isinstance(r2, Value) and r1.value != r2.value:
            return NotEquivalent(tuple(x), r1.value, r2.value)
    return None


def prove_pair(s1: Side, s2: Side, config: Config = DEFAULT) -> ProofOutcome:
    """Basic rule first, the path-split rule when it does not go through."""
    out = prove_part_eq_basic(s1, s2, config)
    if out.proven:
        return out
    basic = out
    out = prove_full_part_eq(s1, s2, config)
    out.evidence = basic.evidence + out.evidence
    out.witness = out.witness if out.witness is not None else basic.witness
    if not isinstance(out.verdict, (Equivalent, NotEquivalent)):
        for w in (out.witness, basic.witness):
            hit = w is not None and confirm_witness(s1, s2, w, config)
            if hit:
                out.verdict = hit
                out.evidence.append(("replay", str(hit)))
                return out
    return out


def prove_programs(p1: SourceUnit, p2: SourceUnit, mapping: PairMapping,
                   config: Config = DEFAULT) -> EquivalenceReport:
    """Prove mapped pairs callees first; proven pairs become one shared UF for their callers."""
    for a, b in mapping.pairs:
        for unit, n in ((p1, a), (p2, b)):
            if n not in unit:
                raise UndefinedCallee(n, "named in the pair mapping")
    proven1: Dict[str, str] = {}
    proven2: Dict[str, str] = {}
    externs: List[Extern] = []
    failed = set()
    reports = []
    for pair in _bottom_up(p1, mapping.pairs):
        a, b = pair
        t = time.monotonic()
        below = [q for q in mapping.pairs if q != pair and
                 (q[0] in _callees(p1, a) or q[1] in _callees(p2, b))]
        blocked = [q for q in below if q in failed]
        if blocked:
            out = ProofOutcome(NotProven("CalleeUnproven", ", ".join(f"{x}/{y}" for x, y in blocked)))
        else:
            s1 = _side_for(p1, a, proven1, externs)
            s2 = _side_for(p2, b, proven2, externs)
            out = prove_pair(s1, s2, config)
            if (config.refute_sweep and
                    not isinstance(out.verdict, (Equivalent, NotEquivalent))):
                hit = refute_sweep(p1, a, p2, b, config)
                if hit is not None:
                    out.verdict = hit
                    out.evidence.append(("sweep", str(hit)))
        if out.proven:
            sym = _uf_symbol(pair)
            proven1[a] = proven2[b] = sym
            externs.append(Extern(sym, p1.function(a).arity))
        else:
            failed.add(pair)
        reports.append(PairReport(pair, out, time.monotonic() - t))
    return EquivalenceReport(reports)
