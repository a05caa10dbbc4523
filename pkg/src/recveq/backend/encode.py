"""Guarded symbolic encoding of flat (or bounded-unwound) programs.

Calls are inlined; branches are executed on both sides and merged with
``ite``; side effects (assumptions, assertions, flag updates, leaf
recordings) carry the guard of the path that performs them.  The result
is a pair of terms: what the executions assume and what they assert.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from ..errors import BudgetExceeded, NotFlat, UnsupportedConstruct
from ..lang.ast import (NONDET, Assert, Assign, Assume, Binary, Block, Call, Decl, ExprStmt,
                        If, IntLit, Return, SourceUnit, Unary, Var, While)
from ..lang.check import recursive_call_sites
from ..oracle import (COIN, GET_FLAG, LEAVES_DIFFER, RECORD, SET_FLAG, SIZE, AssertionFailed,
                      Interpreter)
from ..transforms import BLOCK, AssumeFalse, _redirect_recursive, stub_function
from . import terms as T
from .solve import Formula, solve
from .terms import BOOL, FALSE, TRUE, Term


def nondet_name(key: Tuple[int, ...]) -> str:
    return "nd:" + ".".join(str(k) for k in key)


def key_of(name: str) -> Tuple[int, ...]:
    return tuple(int(x) for x in name[3:].split(".")) if name.startswith("nd:") else ()


@dataclass
class _Frame:
    env: Dict[str, Term]
    done: Term = FALSE
    ret: Optional[Term] = None

    def copy(self):
        return _Frame(dict(self.env), self.done, self.ret)


@dataclass
class _Record:
    guard: Term
    depth: Term
    site: Term
    args: Tuple[Term, ...]
    path: Tuple[int, ...]


@dataclass
class Encoding:
    assumes: Term
    obligation: Term
    inputs: Tuple[str, ...]
    frames: int
    records: Dict[int, List[_Record]] = field(default_factory=dict)

    def violation(self):
        """Constraints whose models are assertion-violating executions."""
        return (self.assumes, T.not_(self.obligation))


class Encoder:
    def __init__(self, unit: SourceUnit, width: int, unwind: Optional[int] = None,
                 step_bound: int = 200_000):
        self.funcs = {f.name: f for f in unit.functions}
        self.externs = set(e.name for e in unit.externs)
        self.W = width
        self.unwind = unwind
        self.step_bound = step_bound
        self.assumes: List[Term] = []
        self.obligations: List[Term] = []
        self.flag = FALSE
        self.records: Dict[int, List[_Record]] = {1: [], 2: []}
        self.stack: List[str] = []
        self.frames = 0

    def const(self, v):
        return T.const(v, self.W)

    def as_int(self, t: Term) -> Term:
        return T.to_int(t, self.W)

    # -- entry ------------------------------------------------------------------------

    def run(self, entry: str, inputs: Sequence[str]) -> Encoding:
        args = [T.var(p, self.W) for p in inputs]
        self.call(entry, args, TRUE, ())
        return Encoding(T.all_(self.assumes), T.all_(self.obligations), tuple(inputs),
                        self.frames, self.records)

    # -- calls ------------------------------------------------------------------------

    def call(self, name: str, args: List[Term], guard: Term, path: Tuple[int, ...]) -> Term:
        f = self.funcs[name]
        depth = self.stack.count(name)
        if depth > 0:
            if self.unwind is None:
                raise NotFlat(f"{name} recurses")
            if depth > self.unwind:
                # unwinding frontier: executions reaching it are discarded
                self.assumes.append(T.not_(guard))
                return self.const(0)
        if guard is FALSE:
            return self.const(0)
        self.frames += 1
        if self.frames > self.step_bound:
            raise BudgetExceeded(f"encoding exceeded {self.step_bound} frames")
        self.stack.append(name)
        fr = _Frame({p: self.as_int(a) for p, a in zip(f.params, args)})
        fr = self.block(f.body.stmts, fr, guard, path)
        self.stack.pop()
        return fr.ret if fr.ret is not None else self.const(0)

    def builtin(self, e: Call, args: List[Term], guard: Term, path) -> Optional[Term]:
        name = e.name
        key = path + (e.site,)
        if name == NONDET:
            return T.var(nondet_name(key), self.W)
        if name == COIN:
            return T.var(nondet_name(key), BOOL)
        if name == SET_FLAG:
            self.flag = T.or_(self.flag, guard)
            return self.const(0)
        if name == GET_FLAG:
            return self.flag
        if name in RECORD:
            side = RECORD.index(name) + 1
            ints = [self.as_int(a) for a in args]
            self.records[side].append(_Record(guard, ints[0], ints[1], tuple(ints[2:]), path))
            return self.const(0)
        if name in SIZE:
            side = SIZE.index(name) + 1
            total = self.const(0)
            for r in self.records[side]:
                total = T.add(total, T.ite(r.guard, self.const(1), self.const(0)))
            return total
        if name == LEAVES_DIFFER:
            return T.not_(self.leaf_multisets_equal())
        if name in self.externs:
            return T.uf(name, [self.as_int(a) for a in args], self.W)
        return None

    def leaf_multisets_equal(self) -> Term:
        """Both sides recorded the same argument tuples equally often.

        Every recorded value is the value of some recorded argument term,
        so comparing the two counts at each distinct term suffices.
        """
        probes: Dict[Tuple[int, ...], Tuple[Term, ...]] = {}
        for side in (1, 2):
            for r in self.records[side]:
                probes.setdefault(tuple(a.id for a in r.args), r.args)
        n = len(self.records[1]) + len(self.records[2])
        cw = max(self.W, n.bit_length() + 1)
        one, zero = T.const(1, cw), T.const(0, cw)

        def count(side, x):
            bits = []
            for r in self.records[side]:
                if len(r.args) != len(x):
                    continue
                hit = T.and_(r.guard, T.all_(T.eq(a, b) for a, b in zip(r.args, x)))
                if hit is not FALSE:
                    bits.append(T.ite(hit, one, zero))
            # a balanced sum propagates better than a ripple chain
            while len(bits) > 1:
                bits = [T.add(bits[i], bits[i + 1]) if i + 1 < len(bits) else bits[i]
                        for i in range(0, len(bits), 2)]
            return bits[0] if bits else zero

        return T.all_(T.eq(count(1, x), count(2, x)) for x in probes.values())

    # -- statements -------------------------------------------------------------------

    def block(self, stmts, fr: _Frame, pc: Term, path) -> _Frame:
        for s in stmts:
            if fr.done is TRUE:
                break
            fr = self.stmt(s, fr, pc, path)
        return fr

    def stmt(self, s, fr: _Frame, pc: Term, path) -> _Frame:
        g = T.and_(pc, T.not_(fr.done))
        if isinstance(s, Block):
            return self.block(s.stmts, fr, pc, path)
        if isinstance(s, Decl):
            fr.env[s.name] = self.as_int(self.expr(s.init, fr.env, g, path)) if s.init is not None \
                else self.const(0)
            return fr
        if isinstance(s, Assign):
            fr.env[s.name] = self.as_int(self.expr(s.value, fr.env, g, path))
            return fr
        if isinstance(s, Return):
            v = self.as_int(self.expr(s.value, fr.env, g, path))
            fr.ret = v if fr.ret is None else T.ite(fr.done, fr.ret, v)
            fr.done = TRUE
            return fr
        if isinstance(s, ExprStmt):
            self.expr(s.expr, fr.env, g, path)
            return fr
        if isinstance(s, Assume):
            c = T.to_bool(self.expr(s.cond, fr.env, g, path))
            self.assumes.append(T.implies(g, c))
            return fr
        if isinstance(s, Assert):
            c = T.to_bool(self.expr(s.cond, fr.env, g, path))
            self.obligations.append(T.implies(g, c))
            return fr
        if isinstance(s, If):
            c = T.to_bool(self.expr(s.cond, fr.env, g, path))
            if c is TRUE:
                return self.stmt(s.then, fr, pc, path)
            if c is FALSE:
                return fr if s.orelse is None else self.stmt(s.orelse, fr, pc, path)
            t = self.stmt(s.then, fr.copy(), T.and_(pc, c), path)
            e = fr if s.orelse is None else self.stmt(s.orelse, fr.copy(), T.and_(pc, T.not_(c)), path)
            return self.merge(c, t, e)
        if isinstance(s, While):
            raise UnsupportedConstruct("while", "loops must be lowered before encoding")
        raise TypeError(s)

    def merge(self, c: Term, t: _Frame, e: _Frame) -> _Frame:
        zero = self.const(0)
        env = {}
        for k in set(t.env) | set(e.env):
            env[k] = T.ite(c, t.env.get(k, zero), e.env.get(k, zero))
        if t.ret is None and e.ret is None:
            ret = None
        else:
            ret = T.ite(c, t.ret if t.ret is not None else zero, e.ret if e.ret is not None else zero)
        return _Frame(env, T.ite(c, t.done, e.done), ret)

    # -- expressions ------------------------------------------------------------------

    def expr(self, e, env, g: Term, path) -> Term:
        if isinstance(e, IntLit):
            return self.const(e.value)
        if isinstance(e, Var):
            return env.get(e.name, self.const(0))
        if isinstance(e, Unary):
            x = self.expr(e.operand, env, g, path)
            if e.op == "-":
                return T.neg(self.as_int(x))
            return T.not_(T.to_bool(x))
        if isinstance(e, Binary):
            op = e.op
            if op in ("&&", "||"):
                a = T.to_bool(self.expr(e.left, env, g, path))
                # the right operand only runs (and has effects) when needed
                g2 = T.and_(g, a) if op == "&&" else T.and_(g, T.not_(a))
                b = T.to_bool(self.expr(e.right, env, g2, path))
                return T.and_(a, b) if op == "&&" else T.or_(a, b)
            a = self.as_int(self.expr(e.left, env, g, path))
            b = self.as_int(self.expr(e.right, env, g, path))
            return _BIN[op](a, b)
        if isinstance(e, Call):
            args = [self.expr(a, env, g, path) for a in e.args]
            r = self.builtin(e, args, g, path)
            if r is not None:
                return r
            if e.name not in self.funcs:
                raise NotFlat(f"call to unknown function {e.name}")
            return self.call(e.name, [self.as_int(a) for a in args], g, path + (e.site,))
        raise TypeError(e)


_BIN = {
    "+": T.add, "-": T.sub, "*": T.mul, "/": T.sdiv, "%": T.srem, "&": T.bvand,
    "==": T.eq, "!=": T.ne, "<": T.slt, "<=": T.sle,
    ">": lambda a, b: T.slt(b, a), ">=": lambda a, b: T.sle(b, a),
}


def encode(unit: SourceUnit, entry: str, inputs: Sequence[str], width: int,
           unwind: Optional[int] = None, step_bound: int = 200_000) -> Encoding:
    return Encoder(unit, width, unwind, step_bound).run(entry, inputs)


# -- validity checking ----------------------------------------------------------------

@dataclass(frozen=True)
class Valid:
    frames: int


@dataclass(frozen=True)
class Counterexample:
    model: object
    input: Tuple[int, ...]


@dataclass(frozen=True)
class Inconclusive:
    reason: str


def replayer(unit: SourceUnit, entry: str, width: int, fuel: int):
    """Build a replay predicate: does the model drive ``entry`` into a failed assertion?"""
    def replay(model, inputs: Sequence[str]) -> bool:
        interp = Interpreter(unit.functions, width,
                             externs=[e.name for e in unit.externs],
                             uf=model.uf,
                             nondet=lambda key: model[nondet_name(key)])
        args = [model[p] for p in inputs]
        return isinstance(interp.run(entry, args, fuel=fuel), AssertionFailed)

    return replay


def check_valid(unit: SourceUnit, entry: str, inputs: Sequence[str], config,
                unwind: Optional[int] = None, label: str = ""):
    """Do all assertions reachable from ``entry`` hold under its assumptions?

    A satisfying model of the violation formula is only reported after
    the interpreter reproduces the failure with the same inputs,
    nondeterministic choices and UF table.
    """
    try:
        enc = encode(unit, entry, inputs, config.width, unwind, config.step_bound)
    except BudgetExceeded as exc:
        return Inconclusive(str(exc))
    formula = Formula.of(*enc.violation(), var_order=inputs, label=label or entry)
    replay = replayer(unit, entry, config.width, fuel=enc.frames + 1)
    try:
        r = solve(formula, config=config, replay=lambda m: replay(m, inputs))
    except BudgetExceeded as exc:
        return Inconclusive(str(exc))
    if not r.sat:
        return Valid(enc.frames)
    if not replay(r.model, inputs):
        return Inconclusive(f"model for {formula.label} did not replay")
    return Counterexample(r.model, tuple(r.model[p] for p in inputs))


def unwind(unit: SourceUnit, uw: int) -> SourceUnit:
    """Literal bounded unwinding of self-recursive functions.

    Level ``k`` of ``f`` (level 0 is ``f`` itself) sends its recursive
    calls to level ``k+1``; level ``uw`` sends them to an assume-false
    stub.  Executions that would go deeper are discarded, which is right
    for counterexample search and wrong for proofs.
    """
    if uw < 1:
        raise ValueError("uw must be at least 1")
    out = []
    need_stub = {}
    for f in unit.functions:
        c = len(recursive_call_sites(f))
        if c == 0:
            out.append(f)
            continue
        names = [f.name] + [f"{f.name}__rv_u{k}" for k in range(1, uw + 1)]
        for k, name in enumerate(names):
            nxt = names[k + 1] if k < uw else BLOCK
            out.append(_redirect_recursive(f, [nxt] * c, name))
        need_stub[len(f.params)] = True
    if need_stub:
        if len(need_stub) > 1:
            raise UnsupportedConstruct("unwind", "recursive functions of different arity")
        (arity,) = need_stub
        out.append(stub_function(AssumeFalse(), arity))
    return SourceUnit(tuple(out), unit.externs)
