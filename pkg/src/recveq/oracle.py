"""Reference interpreter and brute-force partial-equivalence checker.

The interpreter is the ground truth every other component is measured
against.  Arithmetic wraps at the configured width, division and modulo
by zero yield 0, and fuel counts frames (plus loop-condition checks, so
a loop costs the same as its tail-recursive rewrite).
"""
from __future__ import annotations

import itertools
from collections import Counter
import sys
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .lang.ast import (NONDET, Assert, Assign, Assume, Binary, Block, Call, Decl, ExprStmt,
                       FunctionDef, If, IntLit, Return, SourceUnit, Unary, Var, While, calls_in)

sys.setrecursionlimit(max(sys.getrecursionlimit(), 100_000))

# reserved builtins understood by generated programs
COIN = "__rv_coin"
SET_FLAG = "__rv_set_flag"
GET_FLAG = "__rv_flag"
RECORD = ("__rv_record1", "__rv_record2")
LEAVES_DIFFER = "__rv_leaves_differ"
SIZE = ("__rv_size1", "__rv_size2")
BUILTINS = {COIN: 0, SET_FLAG: 0, GET_FLAG: 0, LEAVES_DIFFER: 0, SIZE[0]: 0, SIZE[1]: 0}


def wrap(x: int, width: int) -> int:
    half = 1 << (width - 1)
    return ((x + half) & ((1 << width) - 1)) - half


def c_div(a: int, b: int) -> int:
    if b == 0:
        return 0
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def c_mod(a: int, b: int) -> int:
    if b == 0:
        return 0
    return a - c_div(a, b) * b


# -- results -----------------------------------------------------------------

@dataclass(frozen=True)
class Value:
    value: int


@dataclass(frozen=True)
class NonTermination:
    frames: int


@dataclass(frozen=True)
class Blocked:
    """An ``assume`` failed; the run is not a real execution."""


@dataclass(frozen=True)
class AssertionFailed:
    pass


class _OutOfFuel(Exception):
    pass


class _Blocked(Exception):
    pass


class _AssertFail(Exception):
    pass


@dataclass(frozen=True)
class Frame:
    depth: int
    name: str
    args: Tuple[int, ...]
    # call-site ordinals from the entry frame down to this one
    path: Tuple[int, ...] = ()


@dataclass(frozen=True)
class Record:
    """One leaf recording made by a synchronisation program."""
    depth: int
    site: int
    args: Tuple[int, ...]
    path: Tuple[int, ...]


class Interpreter:
    """Executes a set of functions; UF symbols and ``nondet`` go through hooks.

    ``uf(name, args)`` answers calls to extern symbols; ``nondet(key)``
    answers ``nondet()`` where ``key`` is the tuple of call-site ordinals
    from the entry call plus the ordinal of the ``nondet`` call itself.
    Calls of functions that reach neither hook are memoized with their
    frame cost, which leaves fuel accounting unchanged.
    """

    def __init__(self, functions: Iterable[FunctionDef], width: int = 8,
                 externs: Iterable[str] = (), uf: Optional[Callable] = None,
                 nondet: Optional[Callable] = None, memo: bool = True):
        if isinstance(functions, SourceUnit):
            externs = tuple(externs) + tuple(e.name for e in functions.externs)
            functions = functions.functions
        self.width = width
        self.uf = uf
        self.nondet = nondet
        self.externs = set(externs)
        self.functions: Dict[str, FunctionDef] = {f.name: f for f in functions}
        self._compiled: Dict[str, Callable] = {}
        self._pure = _pure_functions(self.functions) if memo else set()
        # (name, args) -> (value, frames used); exact because pure calls are deterministic
        self._memo: Dict[Tuple[str, Tuple[int, ...]], Tuple[int, int]] = {}
        self._starved: Dict[Tuple[str, Tuple[int, ...]], int] = {}
        self._reset(0)

    def _reset(self, fuel):
        self.fuel = fuel
        self.frames = 0
        self.depth = 0
        self.path: List[int] = []
        self.trace: Optional[List[Frame]] = None
        self.flag = False
        self.records: Dict[int, List[Record]] = {1: [], 2: []}

    def _tick(self):
        self.frames += 1
        if self.frames > self.fuel:
            raise _OutOfFuel()

    # -- public API ---------------------------------------------------------

    def run(self, name: str, args: Sequence[int], fuel: int = 256, trace: bool = False):
        self._reset(fuel)
        if trace:
            self.trace = []
        args = tuple(wrap(a, self.width) for a in args)
        try:
            return Value(self._call(name, args, -1))
        except _OutOfFuel:
            return NonTermination(self.frames)
        except _Blocked:
            return Blocked()
        except _AssertFail:
            return AssertionFailed()

    # -- calls --------------------------------------------------------------

    def _call(self, name, args, site):
        if self.trace is None and name in self._pure:
            hit = self._memo.get((name, args))
            if hit is not None:
                if self.frames + hit[1] > self.fuel:
                    self.frames = self.fuel + 1
                    raise _OutOfFuel()
                self.frames += hit[1]
                return hit[0]
            floor = self._starved.get((name, args))
            if floor is not None and self.frames + floor > self.fuel:
                # known to need at least ``floor`` frames
                self.frames = self.fuel + 1
                raise _OutOfFuel()
            start = self.frames
            try:
                v = self._enter(name, args, site)
            except _OutOfFuel:
                self._starved[(name, args)] = max(floor or 0, self.fuel + 1 - start)
                raise
            self._memo[(name, args)] = (v, self.frames - start)
            return v
        return self._enter(name, args, site)

    def _enter(self, name, args, site):
        fn = self._compiled.get(name)
        if fn is None:
            if name not in self.functions:
                raise KeyError(f"undefined function {name!r}")
            fn = self._compiled[name] = self._compile_function(self.functions[name])
        self._tick()
        self.path.append(site)
        if self.trace is not None:
            self.trace.append(Frame(self.depth, name, args, tuple(self.path[1:])))
        self.depth += 1
        try:
            return fn(args)
        finally:
            self.depth -= 1
            self.path.pop()

    def _builtin(self, call: Call, args):
        name = call.name
        if name == NONDET:
            if self.nondet is None:
                raise RuntimeError("nondet() without a nondet hook")
            return wrap(int(self.nondet(tuple(self.path[1:]) + (call.site,))), self.width)
        if name == COIN:
            if self.nondet is None:
                raise RuntimeError("nondet choice without a nondet hook")
            return int(bool(self.nondet(tuple(self.path[1:]) + (call.site,))))
        if name == SET_FLAG:
            self.flag = True
            return 0
        if name == GET_FLAG:
            return int(self.flag)
        if name in RECORD:
            side = RECORD.index(name) + 1
            self.records[side].append(Record(args[0], args[1], tuple(args[2:]),
                                             tuple(self.path[1:])))
            return 0
        if name in SIZE:
            return len(self.records[SIZE.index(name) + 1])
        if name == LEAVES_DIFFER:
            # multiset comparison: every recording needs its own partner
            s1 = Counter(r.args for r in self.records[1])
            s2 = Counter(r.args for r in self.records[2])
            return int(s1 != s2)
        if name in self.externs:
            if self.uf is None:
                raise RuntimeError(f"call to uninterpreted {name!r} without a uf hook")
            return wrap(int(self.uf(name, tuple(args))), self.width)
        return None

    # -- compilation to closures -------------------------------------------

    def _compile_function(self, f: FunctionDef):
        body = self._stmt(f.body)
        params = f.params

        def run(args):
            env = dict(zip(params, args))
            r = body(env)
            return 0 if r is None else r
        return run

    def _stmt(self, s):
        if isinstance(s, Block):
            parts = [self._stmt(t) for t in s.stmts]

            def block(env):
                for p in parts:
                    r = p(env)
                    if r is not None:
                        return r
                return None
            return block
        if isinstance(s, Decl):
            name = s.name
            if s.init is None:
                def decl(env):
                    env[name] = 0
                return decl
            init = self._expr(s.init)

            def decl_init(env):
                env[name] = init(env)
            return decl_init
        if isinstance(s, Assign):
            name, value = s.name, self._expr(s.value)

            def assign(env):
                env[name] = value(env)
            return assign
        if isinstance(s, Return):
            value = self._expr(s.value)
            return value
        if isinstance(s, If):
            cond, then = self._expr(s.cond), self._stmt(s.then)
            orelse = self._stmt(s.orelse) if s.orelse is not None else None

            def if_(env):
                if cond(env):
                    return then(env)
                if orelse is not None:
                    return orelse(env)
                return None
            return if_
        if isinstance(s, While):
            cond, body = self._expr(s.cond), self._stmt(s.body)

            def while_(env):
                while True:
                    self._tick()
                    if not cond(env):
                        return None
                    r = body(env)
                    if r is not None:
                        return r
            return while_
        if isinstance(s, Assume):
            cond = self._expr(s.cond)

            def assume(env):
                if not cond(env):
                    raise _Blocked()
            return assume
        if isinstance(s, Assert):
            cond = self._expr(s.cond)

            def assert_(env):
                if not cond(env):
                    raise _AssertFail()
            return assert_
        if isinstance(s, ExprStmt):
            e = self._expr(s.expr)

            def expr_stmt(env):
                e(env)
            return expr_stmt
        raise TypeError(s)

    def _expr(self, e):
        W = self.width
        if isinstance(e, IntLit):
            v = wrap(e.value, W)
            return lambda env: v
        if isinstance(e, Var):
            name = e.name
            # a name declared in an untaken branch reads as 0, like the encoder
            return lambda env: env.get(name, 0)
        if isinstance(e, Unary):
            x = self._expr(e.operand)
            if e.op == "-":
                return lambda env: wrap(-x(env), W)
            return lambda env: 0 if x(env) else 1
        if isinstance(e, Binary):
            a, b = self._expr(e.left), self._expr(e.right)
            op = e.op
            if op == "&&":
                return lambda env: 1 if (a(env) and b(env)) else 0
            if op == "||":
                return lambda env: 1 if (a(env) or b(env)) else 0
            return _BINOPS[op](a, b, W)
        if isinstance(e, Call):
            args = [self._expr(x) for x in e.args]
            call = e

            def do_call(env):
                vals = tuple(g(env) for g in args)
                r = self._builtin(call, vals)
                if r is not None:
                    return r
                return self._call(call.name, vals, call.site)
            return do_call
        raise TypeError(e)


_BINOPS = {
    "+": lambda a, b, W: (lambda env: wrap(a(env) + b(env), W)),
    "-": lambda a, b, W: (lambda env: wrap(a(env) - b(env), W)),
    "*": lambda a, b, W: (lambda env: wrap(a(env) * b(env), W)),
    "/": lambda a, b, W: (lambda env: wrap(c_div(a(env), b(env)), W)),
    "%": lambda a, b, W: (lambda env: wrap(c_mod(a(env), b(env)), W)),
    "&": lambda a, b, W: (lambda env: wrap(a(env) & b(env), W)),
    "==": lambda a, b, W: (lambda env: int(a(env) == b(env))),
    "!=": lambda a, b, W: (lambda env: int(a(env) != b(env))),
    "<": lambda a, b, W: (lambda env: int(a(env) < b(env))),
    "<=": lambda a, b, W: (lambda env: int(a(env) <= b(env))),
    ">": lambda a, b, W: (lambda env: int(a(env) > b(env))),
    ">=": lambda a, b, W: (lambda env: int(a(env) >= b(env))),
}


def eval_expr(e, env: Dict[str, int], width: int = 8) -> int:
    """Evaluate a call-free expression (path predicates, assumptions)."""
    return Interpreter((), width)._expr(e)(dict(env))


def eval(f: FunctionDef, args: Sequence[int], fuel: int = 256, width: int = 8,
         unit=None, trace: bool = False):
    """Run ``f`` on ``args``; ``unit`` supplies callees other than ``f``."""
    funcs = list(unit.functions) if unit is not None else []
    if all(g.name != f.name for g in funcs):
        funcs.append(f)
    else:
        funcs = [f if g.name == f.name else g for g in funcs]
    interp = Interpreter(funcs, width)
    result = interp.run(f.name, args, fuel, trace=trace)
    if trace:
        return result, interp.trace
    return result


def _pure_functions(functions: Dict[str, FunctionDef]) -> set:
    """Functions that reach no builtin hook and no UF symbol."""
    calls = {n: {c.name for c in calls_in(f)} for n, f in functions.items()}
    impure = {n for n, cs in calls.items() if any(c not in functions for c in cs)}
    changed = True
    while changed:
        changed = False
        for n, cs in calls.items():
            if n not in impure and cs & impure:
                impure.add(n)
                changed = True
    return set(functions) - impure


# -- brute force ---------------------------------------------------------------

def zigzag(k: int) -> int:
    """0, -1, 1, -2, 2, ... : the canonical small-first enumeration order."""
    return (k >> 1) ^ -(k & 1)


@dataclass(frozen=True)
class DomainSpec:
    ranges: Optional[Tuple[Tuple[int, int], ...]] = None
    fuel: int = 256
    width: int = 8

    def param_values(self, arity: int):
        half = 1 << (self.width - 1)
        ranges = self.ranges or ((-half, half - 1),) * arity
        if len(ranges) != arity:
            raise ValueError(f"domain has {len(ranges)} ranges for arity {arity}")
        out = []
        for lo, hi in ranges:
            vals = [zigzag(k) for k in range(1 << self.width)]
            out.append([v for v in vals if lo <= v <= hi])
        return out

    def inputs(self, arity: int):
        return itertools.product(*self.param_values(arity))


@dataclass(frozen=True)
class EquivalentOnDomain:
    checked: int
    fuel_limited: Tuple[Tuple[int, ...], ...] = ()


@dataclass(frozen=True)
class FuelLimited(EquivalentOnDomain):
    """No disagreement, but some inputs were excluded for running out of fuel."""

    @property
    def inputs(self):
        return self.fuel_limited


@dataclass(frozen=True)
class Witness:
    input: Tuple[int, ...]
    v1: int
    v2: int


def brute_force_equiv(f1: FunctionDef, f2: FunctionDef, d: DomainSpec = DomainSpec(),
                      unit1=None, unit2=None):
    """Check partial equivalence of ``f1`` and ``f2`` input by input.

    Inputs are visited in zigzag-lexicographic order, so the returned
    witness is the first disagreement in that order.
    """
    if f1.arity != f2.arity:
        raise ValueError("arity mismatch")
    i1 = Interpreter(_with(f1, unit1), d.width, externs=_externs(unit1))
    i2 = Interpreter(_with(f2, unit2), d.width, externs=_externs(unit2))
    limited = []
    checked = 0
    for x in d.inputs(f1.arity):
        r1 = i1.run(f1.name, x, d.fuel)
        r2 = i2.run(f2.name, x, d.fuel)
        if isinstance(r1, Value) and isinstance(r2, Value):
            checked += 1
            if r1.value != r2.value:
                return Witness(tuple(x), r1.value, r2.value)
        else:
            limited.append(tuple(x))
    if limited:
        return FuelLimited(checked, tuple(limited))
    return EquivalentOnDomain(checked, ())


def _with(f, unit):
    funcs = [g for g in (unit.functions if unit is not None else ()) if g.name != f.name]
    return funcs + [f]


def _externs(unit):
    return tuple(e.name for e in unit.externs) if unit is not None else ()
