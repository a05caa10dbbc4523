"""Loop elimination: every ``while`` becomes a fresh tail-recursive function."""
from __future__ import annotations

from typing import List

from .ast import (RESERVED_PREFIX, Assign, Block, Call, Decl, FunctionDef, If, IntLit, Return,
                  Var, While, free_vars, map_stmt_exprs, renumber_calls, stmt_exprs)


def _assigned(s) -> set:
    out = set()
    if isinstance(s, (Assign, Decl)):
        out.add(s.name)
    elif isinstance(s, Block):
        for t in s.stmts:
            out |= _assigned(t)
    elif isinstance(s, If):
        out |= _assigned(s.then)
        if s.orelse is not None:
            out |= _assigned(s.orelse)
    elif isinstance(s, While):
        out |= _assigned(s.body)
    return out


def _declared(s) -> set:
    out = set()
    if isinstance(s, Decl):
        out.add(s.name)
    elif isinstance(s, Block):
        for t in s.stmts:
            out |= _declared(t)
    elif isinstance(s, If):
        out |= _declared(s.then)
        if s.orelse is not None:
            out |= _declared(s.orelse)
    elif isinstance(s, While):
        out |= _declared(s.body)
    return out


def _used(s) -> set:
    names = set()
    for e in stmt_exprs(s):
        names |= free_vars(e)
    return names


class _Rewriter:
    def __init__(self, f: FunctionDef):
        self.f = f
        self.counter = 0
        self.generated: List[FunctionDef] = []

    def fresh(self):
        k = self.counter
        self.counter += 1
        return k

    def rewrite_block(self, stmts, outside_uses):
        out = []
        for i, s in enumerate(stmts):
            rest = set()
            for t in stmts[:i] + stmts[i + 1:]:
                rest |= _used(t)
            out.extend(self.rewrite(s, outside_uses | rest))
        return out

    def rewrite(self, s, outside_uses):
        if isinstance(s, Block):
            return [Block(tuple(self.rewrite_block(list(s.stmts), outside_uses)), pos=s.pos)]
        if isinstance(s, If):
            then = self._single(self.rewrite(s.then, outside_uses | _used(s.orelse or Block(()))))
            orelse = None
            if s.orelse is not None:
                orelse = self._single(self.rewrite(s.orelse, outside_uses | _used(s.then)))
            return [If(s.cond, then, orelse, pos=s.pos)]
        if isinstance(s, While):
            return self.lower_loop(s, outside_uses)
        return [s]

    @staticmethod
    def _single(stmts):
        return stmts[0] if len(stmts) == 1 else Block(tuple(stmts))

    def lower_loop(self, loop: While, outside_uses):
        k = self.fresh()
        local = _declared(loop.body)
        params = sorted((_used(loop) | _assigned(loop.body)) - local)
        # assigned-only variables are parameters too: with zero iterations the
        # pre-loop value is what flows out
        live_out = sorted((_assigned(loop.body) - local) & outside_uses)
        results = live_out or [None]
        out_stmts = []
        names = []
        for v in results:
            name = f"{RESERVED_PREFIX}loop{k}" if len(results) == 1 else f"{RESERVED_PREFIX}loop{k}_{v}"
            names.append((name, v))
        for name, v in names:
            # inner loops of the body are lowered inside the generated function
            inner = _Rewriter(FunctionDef(name, tuple(params), Block(())))
            inner.counter = self.counter
            body_stmts = inner.rewrite(loop.body, set(params) | _used(loop))
            self.counter = inner.counter
            self.generated.extend(inner.generated)
            recur = Call(name, tuple(Var(p) for p in params))
            step = Block(tuple(body_stmts) + (Return(recur),))
            body = Block((If(loop.cond, step), Return(Var(v) if v is not None else IntLit(0))))
            self.generated.append(renumber_calls(FunctionDef(name, tuple(params), body)))
        temps = []
        for name, v in names:
            tmp = f"{RESERVED_PREFIX}t{k}" if v is None else f"{RESERVED_PREFIX}t{k}_{v}"
            out_stmts.append(Decl(tmp, Call(name, tuple(Var(p) for p in params))))
            temps.append((tmp, v))
        for tmp, v in temps:
            if v is not None:
                out_stmts.append(Assign(v, Var(tmp)))
        return out_stmts


def loops_to_recursion(f: FunctionDef, start: int = 0) -> List[FunctionDef]:
    """Return ``f`` rewritten loop-free followed by one function per loop.

    A loop with a single live-out variable becomes one function returning
    that variable; several live-out variables yield one function per
    variable, each replaying the whole loop.  Loop-free input is returned
    unchanged.
    """
    if not any(isinstance(s, While) for s in _all_stmts(f.body)):
        return [f]
    rw = _Rewriter(f)
    rw.counter = start
    stmts = rw.rewrite_block(list(f.body.stmts), set())
    main = renumber_calls(FunctionDef(f.name, f.params, Block(tuple(stmts), pos=f.body.pos),
                                      pos=f.pos))
    return [main] + rw.generated


def _all_stmts(s):
    yield s
    if isinstance(s, Block):
        for t in s.stmts:
            yield from _all_stmts(t)
    elif isinstance(s, If):
        yield from _all_stmts(s.then)
        if s.orelse is not None:
            yield from _all_stmts(s.orelse)
    elif isinstance(s, While):
        yield from _all_stmts(s.body)


def unit_loops_to_recursion(unit):
    from .ast import SourceUnit
    funcs = []
    taken = set(unit.names)
    for f in unit.functions:
        # loop numbering is unit-wide so generated names never collide
        start = 0
        while any(n.startswith(f"{RESERVED_PREFIX}loop{start}") for n in taken):
            start += 1
        out = loops_to_recursion(f, start)
        taken.update(g.name for g in out)
        funcs.extend(out)
    return SourceUnit(tuple(funcs), unit.externs)


__all__ = ["loops_to_recursion", "unit_loops_to_recursion", "map_stmt_exprs"]
