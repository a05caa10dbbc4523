"""Forking symbolic execution over mini-language programs.

Exploration is depth-first by re-execution: a path is identified by the
list of branch decisions taken at symbolic conditions, and each run
replays a decision prefix before extending it.  Feasibility of a branch
is decided on a bitmask over the whole input domain when the domain is
small and the condition mentions only inputs, and by the solver
otherwise.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .backend import terms as T
from .backend.encode import nondet_name
from .backend.enumerate import zigzag_np
from .backend.solve import Formula, Model, solve
from .backend.terms import BOOL, FALSE, TRUE, Term
from .config import DEFAULT, Config
from .errors import BudgetExceeded, RecveqError, PathBudgetExceeded, UnsupportedConstruct
from .lang.ast import (NONDET, Assert, Assign, Assume, Binary, Block, Call, Decl, Expr, ExprStmt,
                       Extern, FunctionDef, If, IntLit, Return, SourceUnit, Unary, Var, While, calls_in)
from .lang.check import call_graph
from .lang.printer import expr_str
from .oracle import COIN, GET_FLAG, SET_FLAG, AssertionFailed, Interpreter
from .transforms import MAIN, RET, AssumeFalse, Instrumented, RetZero, substitute_calls, with_stub


# -- predicates -----------------------------------------------------------------------

def term_to_expr(t: Term) -> Expr:
    """Render a term as a mini-language expression with the same meaning."""
    memo: Dict[int, Expr] = {}
    for n in T.topo([t]):
        a = [memo[x.id] for x in n.args]
        op = n.op
        if op == "const":
            e = IntLit(n.val) if n.val >= 0 else Unary("-", IntLit(-n.val))
        elif op == "bconst":
            e = IntLit(int(n.val))
        elif op == "var":
            e = Var(n.val)
        elif op == "uf":
            e = Call(n.val, tuple(a))
        elif op == "neg":
            e = Unary("-", a[0])
        elif op == "not":
            e = Unary("!", a[0])
        elif op == "ite":
            if n.width == BOOL:
                e = Binary("||", Binary("&&", a[0], a[1]), Binary("&&", Unary("!", a[0]), a[2]))
            else:
                e = Binary("+", Binary("*", a[0], a[1]), Binary("*", Unary("!", a[0]), a[2]))
        else:
            e = Binary(_OPS[op], a[0], a[1])
        memo[n.id] = e
    return memo[t.id]


_OPS = {"add": "+", "mul": "*", "sdiv": "/", "srem": "%", "bvand": "&", "eq": "==",
        "slt": "<", "sle": "<=", "and": "&&", "or": "||"}


@dataclass(frozen=True)
class PathPredicate:
    """A boolean condition over a function's parameters."""
    term: Term
    params: Tuple[str, ...]
    recursive: bool = False

    @property
    def expr(self) -> Expr:
        return term_to_expr(self.term)

    def __str__(self):
        return expr_str(self.expr)

    def holds(self, args: Sequence[int], width: int) -> bool:
        env = {p: np.int64(v) for p, v in zip(self.params, args)}
        return bool(T.evaluate([self.term], env)[0])

    def mask(self, width: int) -> np.ndarray:
        """Truth values over the full input domain, inputs in ``domain_inputs`` order."""
        env = _domain(self.params, width)
        v = T.evaluate([self.term], env)[0]
        return np.broadcast_to(np.asarray(v, dtype=bool), _domain_len(self.params, width)).copy()


def disjunction(preds: Sequence[PathPredicate], params: Sequence[str]) -> PathPredicate:
    return PathPredicate(T.any_(p.term for p in preds), tuple(params))


def _domain_len(params, width):
    return 1 << (width * len(params))


def _domain(params: Sequence[str], width: int) -> Dict[str, np.ndarray]:
    """All inputs, lexicographic with zigzag digits (first parameter most significant)."""
    n = len(params)
    idx = np.arange(_domain_len(params, width), dtype=np.int64)
    env = {}
    for i, p in enumerate(params):
        digit = (idx >> (width * (n - 1 - i))) & ((1 << width) - 1)
        env[p] = zigzag_np(digit)
    return env


def domain_inputs(params: Sequence[str], width: int) -> np.ndarray:
    env = _domain(params, width)
    return np.stack([env[p] for p in params], axis=1) if params else np.zeros((1, 0), np.int64)


# -- exploration --------------------------------------------------------------------

class _Ret(Exception):
    def __init__(self, value):
        self.value = value


class _Pruned(Exception):
    pass


class _DepthHit(Exception):
    pass


class StepBudgetExceeded(PathBudgetExceeded):
    """The exploration entered more frames than its step bound."""

    def __init__(self, limit):
        RecveqError.__init__(self, f"step budget of {limit} frames exceeded")
        self.limit = limit


class _Violation(Exception):
    def __init__(self, pc):
        self.pc = pc


@dataclass
class PathResult:
    pc: Term
    kind: str                 # "return" | "violation" | "depth"
    value: Optional[Term] = None
    calls: Counter = field(default_factory=Counter)
    flag: bool = False


class _Feasibility:
    """Satisfiability of path conditions, memoized on hash-consed terms."""

    def __init__(self, inputs: Sequence[str], width: int, config: Config):
        self.inputs = tuple(inputs)
        self.width = width
        self.config = config
        self.use_mask = width * len(inputs) <= config.enumerate_max_bits
        self.env = _domain(inputs, width) if self.use_mask else None
        self.cache: Dict[int, Tuple[Term, bool]] = {}
        self.masks: Dict[int, Tuple[Term, Optional[np.ndarray]]] = {}
        self.unknown = 0

    def mask(self, t: Term) -> Optional[np.ndarray]:
        """Truth values over the domain, or None when ``t`` is not a pure input predicate."""
        if not self.use_mask:
            return None
        hit = self.masks.get(t.id)
        if hit is not None:
            return hit[1]
        # path conditions grow by conjunction, so reuse the parts' masks
        if t.op in ("and", "or"):
            a, b = self.mask(t.args[0]), self.mask(t.args[1])
            m = None if a is None or b is None else (a & b if t.op == "and" else a | b)
        elif t.op == "not":
            a = self.mask(t.args[0])
            m = None if a is None else ~a
        elif T.uf_apps([t]) or any(v.val not in self.inputs for v in T.free_vars([t])):
            m = None
        else:
            v = T.evaluate([t], self.env)[0]
            m = np.broadcast_to(np.asarray(v, dtype=bool), _domain_len(self.inputs, self.width))
        self.masks[t.id] = (t, m)
        return m

    def feasible(self, t: Term) -> bool:
        if t is TRUE:
            return True
        if t is FALSE:
            return False
        m = self.mask(t)
        if m is not None:
            return bool(m.any())
        hit = self.cache.get(t.id)
        if hit is not None:
            return hit[1]
        try:
            ok = solve(Formula.of(t, var_order=self.inputs, label="path feasibility"),
                       config=self.config).sat
        except BudgetExceeded:
            # unknown counts as feasible: exploring too much is safe
            self.unknown += 1
            ok = True
        self.cache[t.id] = (t, ok)
        return ok

    def witness(self, t: Term) -> Optional[Model]:
        """First model of ``t`` in the deterministic input order."""
        m = self.mask(t)
        if m is not None:
            hits = np.flatnonzero(m)
            if not len(hits):
                return None
            return Model({p: int(self.env[p][hits[0]]) for p in self.inputs})
        try:
            r = solve(Formula.of(t, var_order=self.inputs, label="path witness"), config=self.config)
        except BudgetExceeded:
            return None
        return r.model if r.sat else None


class Explorer:
    """Depth-first enumeration of the feasible paths of ``entry``."""

    def __init__(self, unit: SourceUnit, width: int, config: Config = DEFAULT,
                 depth_bound: Optional[int] = None):
        self.funcs = {f.name: f for f in unit.functions}
        self.externs = {e.name for e in unit.externs}
        self.W = width
        self.config = config
        self.depth_bound = depth_bound
        # frames entered over the whole exploration, replays included
        self.frames = 0

    def explore(self, entry: str, inputs: Sequence[str], path_bound: int,
                feas: Optional[_Feasibility] = None) -> Iterator[PathResult]:
        self.feas = feas or _Feasibility(inputs, self.W, self.config)
        args = [T.var(p, self.W) for p in inputs]
        stack: List[List[bool]] = [[]]
        count = 0
        while stack:
            prefix = stack.pop()
            r = self._run(entry, args, prefix, stack)
            if r is None:
                continue
            count += 1
            if count > path_bound:
                raise PathBudgetExceeded(path_bound)
            yield r

    # one path -------------------------------------------------------------------

    def _run(self, entry, args, prefix, stack) -> Optional[PathResult]:
        self.prefix = prefix
        self.choices: List[bool] = []
        self.stack = stack
        self.pc = TRUE
        self.calls: Counter = Counter()
        self.flag = False
        self.depth = 0
        try:
            v = self._call(entry, args, ())
        except _Pruned:
            return None
        except _DepthHit:
            return PathResult(self.pc, "depth", None, self.calls, self.flag)
        except _Violation as exc:
            return PathResult(exc.pc, "violation", None, self.calls, self.flag)
        return PathResult(self.pc, "return", v, self.calls, self.flag)

    def _branch(self, c: Term) -> bool:
        if c is TRUE or c is FALSE:
            return c is TRUE
        i = len(self.choices)
        if i < len(self.prefix):
            take = self.prefix[i]
        else:
            yes = self.feas.feasible(T.and_(self.pc, c))
            no = self.feas.feasible(T.and_(self.pc, T.not_(c)))
            if not (yes or no):
                raise _Pruned()
            take = yes
            if yes and no:
                self.stack.append(self.choices + [False])
        self.choices.append(take)
        self.pc = T.and_(self.pc, c if take else T.not_(c))
        return take

    def _call(self, name, args, path):
        f = self.funcs[name]
        self.calls[name] += 1
        self.frames += 1
        self.depth += 1
        if self.depth_bound is not None and self.depth > self.depth_bound:
            raise _DepthHit()
        if self.frames > self.config.step_bound:
            raise StepBudgetExceeded(self.config.step_bound)
        env = {p: a for p, a in zip(f.params, args)}
        try:
            self._block(f.body.stmts, env, path)
            v = T.const(0, self.W)
        except _Ret as r:
            v = r.value
        self.depth -= 1
        return v

    def _block(self, stmts, env, path):
        for s in stmts:
            self._stmt(s, env, path)

    def _stmt(self, s, env, path):
        if isinstance(s, Block):
            self._block(s.stmts, env, path)
        elif isinstance(s, Decl):
            env[s.name] = self._int(s.init, env, path) if s.init is not None else T.const(0, self.W)
        elif isinstance(s, Assign):
            env[s.name] = self._int(s.value, env, path)
        elif isinstance(s, Return):
            raise _Ret(self._int(s.value, env, path))
        elif isinstance(s, ExprStmt):
            self._expr(s.expr, env, path)
        elif isinstance(s, If):
            if self._branch(self._bool(s.cond, env, path)):
                self._stmt(s.then, env, path)
            elif s.orelse is not None:
                self._stmt(s.orelse, env, path)
        elif isinstance(s, Assume):
            c = self._bool(s.cond, env, path)
            self.pc = T.and_(self.pc, c)
            if c is not TRUE and not self.feas.feasible(self.pc):
                raise _Pruned()
        elif isinstance(s, Assert):
            c = self._bool(s.cond, env, path)
            bad = T.and_(self.pc, T.not_(c))
            if self.feas.feasible(bad):
                raise _Violation(bad)
            self.pc = T.and_(self.pc, c)
        elif isinstance(s, While):
            raise UnsupportedConstruct("while", "loops must be lowered before exploration")
        else:
            raise TypeError(s)

    def _int(self, e, env, path) -> Term:
        return T.to_int(self._expr(e, env, path), self.W)

    def _bool(self, e, env, path) -> Term:
        return T.to_bool(self._expr(e, env, path))

    def _expr(self, e, env, path) -> Term:
        if isinstance(e, IntLit):
            return T.const(e.value, self.W)
        if isinstance(e, Var):
            return env.get(e.name, T.const(0, self.W))
        if isinstance(e, Unary):
            if e.op == "-":
                return T.neg(self._int(e.operand, env, path))
            return T.not_(self._bool(e.operand, env, path))
        if isinstance(e, Binary):
            if e.op in ("&&", "||"):
                a = self._bool(e.left, env, path)
                if not _has_call(e.right):
                    b = self._bool(e.right, env, path)
                    return T.and_(a, b) if e.op == "&&" else T.or_(a, b)
                # effects in the right operand: split on the left one
                if self._branch(a) == (e.op == "&&"):
                    return self._bool(e.right, env, path)
                return a
            a = self._int(e.left, env, path)
            b = self._int(e.right, env, path)
            return _BIN[e.op](a, b)
        if isinstance(e, Call):
            args = [self._expr(a, env, path) for a in e.args]
            return self._invoke(e, args, path)
        raise TypeError(e)

    def _invoke(self, e: Call, args, path) -> Term:
        name = e.name
        if name == NONDET:
            return T.var(nondet_name(path + (e.site,)), self.W)
        if name == COIN:
            return T.var(nondet_name(path + (e.site,)), BOOL)
        if name == SET_FLAG:
            self.flag = True
            return T.const(0, self.W)
        if name == GET_FLAG:
            return T.boolc(self.flag)
        ints = [T.to_int(a, self.W) for a in args]
        if name in self.externs:
            self.calls[name] += 1
            return T.uf(name, ints, self.W)
        if name in self.funcs:
            return self._call(name, ints, path + (e.site,))
        raise UnsupportedConstruct(name, "builtin not supported by path exploration")


def _has_call(e) -> bool:
    return next(calls_in(e), None) is not None


_BIN = {
    "+": T.add, "-": T.sub, "*": T.mul, "/": T.sdiv, "%": T.srem, "&": T.bvand,
    "==": T.eq, "!=": T.ne, "<": T.slt, "<=": T.sle,
    ">": lambda a, b: T.slt(b, a), ">=": lambda a, b: T.sle(b, a),
}


# -- the operations ------------------------------------------------------------------------

def _top_frame_unit(f: FunctionDef, mode, unit: Optional[SourceUnit]) -> SourceUnit:
    """``f`` with its self-calls stubbed; recursive helpers it calls stay opaque."""
    funcs = [substitute_calls(f, {f.name}, mode)]
    externs = list(unit.externs) if unit is not None else []
    if unit is not None:
        graph = call_graph(unit)
        for g in unit.functions:
            if g.name == f.name:
                continue
            if graph.recursive(g.name):
                # recursive helpers (lowered loops too) stay abstract
                externs.append(Extern(g.name, len(g.params)))
            else:
                funcs.append(g)
        keep = {e.name for e in externs}
        funcs = [g for g in funcs if g.name not in keep or g.name == f.name]
    return with_stub(funcs, mode, len(f.params), externs)


def get_all_paths(f: FunctionDef, config: Config = DEFAULT,
                  unit: Optional[SourceUnit] = None) -> List[PathPredicate]:
    """Top-frame paths of ``f``; recursive calls are ret-stubbed and tagged."""
    flat = _top_frame_unit(f, RetZero(), unit)
    ex = Explorer(flat, config.width, config)
    out = []
    for r in ex.explore(f.name, f.params, config.path_bound):
        out.append(PathPredicate(r.pc, tuple(f.params), r.calls[RET] > 0))
    return out


def natural_base_case_precondition(f: FunctionDef, config: Config = DEFAULT,
                                   unit: Optional[SourceUnit] = None) -> PathPredicate:
    """Inputs on which ``f`` returns without recursing (rho)."""
    flat = _top_frame_unit(f, AssumeFalse(), unit)
    ex = Explorer(flat, config.width, config)
    paths = [r for r in ex.explore(f.name, f.params, config.path_bound)]
    return disjunction([PathPredicate(r.pc, tuple(f.params)) for r in paths], f.params)


def base_case_precondition(inst: Instrumented, config: Config = DEFAULT,
                           externs=(), helpers=()) -> PathPredicate:
    """Inputs on which the unrolled clones reach a base case (bcpc).

    Leaf calls (calls back to the entry clone) are ret-stubbed, so only
    the materialized clones can raise the flag.
    """
    clones = [substitute_calls(g, {inst.entry}, RetZero()) for g in inst.functions]
    unit = with_stub(clones + [inst.main] + list(helpers), RetZero(), len(inst.main.params), externs)
    ex = Explorer(unit, config.width, config)
    params = tuple(inst.main.params)
    paths = [PathPredicate(r.pc, params) for r in ex.explore(MAIN, params, config.path_bound)]
    return disjunction(paths, params)


@dataclass(frozen=True)
class BaseCaseInfo:
    rho1: PathPredicate
    rho2: PathPredicate
    bcpc1: PathPredicate
    bcpc2: PathPredicate

    @property
    def ebcp(self) -> PathPredicate:
        """bcpc1 or bcpc2, over side 1's parameter names."""
        return PathPredicate(T.or_(self.bcpc1.term, rename(self.bcpc2, self.bcpc1.params).term),
                             self.bcpc1.params)


def rename(p: PathPredicate, params: Sequence[str]) -> PathPredicate:
    """The same predicate over positionally renamed parameters."""
    if tuple(params) == p.params:
        return p
    names = dict(zip(p.params, params))
    mapping = {v.id: T.var(names[v.val], v.width) for v in T.free_vars([p.term]) if v.val in names}
    return PathPredicate(T.substitute([p.term], mapping)[0], tuple(params), p.recursive)


@dataclass(frozen=True)
class Proven:
    paths: int


@dataclass(frozen=True)
class Refuted:
    input: Tuple[int, ...]


@dataclass(frozen=True)
class Inconclusive:
    reason: str


def symexec_equiv(unit: SourceUnit, entry: str, config: Config = DEFAULT,
                  depth_bound: Optional[int] = None, path_bound: Optional[int] = None):
    """Explore ``entry`` (a task main) with recursion kept.

    Proven needs every path to close within the bounds; a reported
    refutation has been reproduced by the interpreter.
    """
    depth_bound = depth_bound or config.depth_bound
    path_bound = path_bound or config.path_bound
    main = {f.name: f for f in unit.functions}[entry]
    inputs = tuple(main.params)
    ex = Explorer(unit, config.width, config, depth_bound=depth_bound)
    feas = _Feasibility(inputs, config.width, config)
    hit_bound = None
    n = 0
    try:
        for r in ex.explore(entry, inputs, path_bound, feas):
            n += 1
            if r.kind == "depth":
                hit_bound = hit_bound or f"depth bound {depth_bound} reached"
            elif r.kind == "violation":
                w = feas.witness(r.pc)
                if w is None:
                    hit_bound = hit_bound or "violation without a witness"
                    continue
                args = tuple(int(w[p]) for p in inputs)
                interp = Interpreter(unit, config.width, uf=w.uf)
                if isinstance(interp.run(entry, args, fuel=config.oracle_fuel), AssertionFailed):
                    return Refuted(args)
                hit_bound = hit_bound or f"witness {args} did not replay within fuel"
    except StepBudgetExceeded as exc:
        return Inconclusive(str(exc))
    except PathBudgetExceeded:
        return Inconclusive(f"path bound {path_bound} reached")
    if hit_bound:
        return Inconclusive(hit_bound)
    if feas.unknown:
        return Inconclusive("solver budget exhausted on a feasibility query")
    return Proven(n)


def paths_json(f: FunctionDef, paths: Sequence[PathPredicate]) -> str:
    return json.dumps({"function": f.name,
                       "paths": [{"pred": str(p), "recursive": p.recursive} for p in paths]},
                      indent=2)
