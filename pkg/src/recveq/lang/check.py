"""Static checks and call-graph construction."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from ..errors import (ArityMismatch, DuplicateFunction, MissingReturn,
                      MutualRecursionUnsupported, ReservedIdentifier, UndefinedCallee,
                      UndefinedVariable, UnsupportedConstruct)
from .ast import (NONDET, RESERVED_PREFIX, Assert, Assign, Assume, Block, Decl, FunctionDef,
                  If, Return, SourceUnit, Var, While, calls_in, stmt_exprs, sub_exprs)


@dataclass(frozen=True)
class CallSite:
    site_index: int
    callee: str
    args: tuple


def recursive_call_sites(f: FunctionDef) -> List[CallSite]:
    """Self-calls of ``f`` in textual order; the list length is c(f)."""
    return [CallSite(i, c.name, c.args)
            for i, c in enumerate(c for c in calls_in(f) if c.name == f.name)]


def always_returns(s) -> bool:
    if isinstance(s, Return):
        return True
    if isinstance(s, Block):
        return any(always_returns(t) for t in s.stmts)
    if isinstance(s, If):
        return s.orelse is not None and always_returns(s.then) and always_returns(s.orelse)
    return False


def _check_vars(f: FunctionDef):
    scope = set(f.params)

    def use(e):
        for x in sub_exprs(e):
            if isinstance(x, Var) and x.name not in scope:
                raise UndefinedVariable(x.name, f"in function {f.name}")

    def walk(s):
        if isinstance(s, Decl):
            if s.init is not None:
                use(s.init)
            scope.add(s.name)
        elif isinstance(s, Assign):
            use(s.value)
            if s.name not in scope:
                raise UndefinedVariable(s.name, f"assignment in {f.name}")
        elif isinstance(s, Block):
            for t in s.stmts:
                walk(t)
        elif isinstance(s, If):
            use(s.cond)
            walk(s.then)
            if s.orelse is not None:
                walk(s.orelse)
        elif isinstance(s, While):
            use(s.cond)
            walk(s.body)
        else:
            for e in stmt_exprs(s):
                use(e)

    walk(f.body)


def _has_verification_stmt(s) -> bool:
    if isinstance(s, (Assume, Assert)):
        return True
    if isinstance(s, Block):
        return any(_has_verification_stmt(t) for t in s.stmts)
    if isinstance(s, If):
        return _has_verification_stmt(s.then) or (
            s.orelse is not None and _has_verification_stmt(s.orelse))
    if isinstance(s, While):
        return _has_verification_stmt(s.body)
    return False


def _returns_inside_loop(s, in_loop=False) -> bool:
    if isinstance(s, Return):
        return in_loop
    if isinstance(s, Block):
        return any(_returns_inside_loop(t, in_loop) for t in s.stmts)
    if isinstance(s, If):
        return (_returns_inside_loop(s.then, in_loop)
                or (s.orelse is not None and _returns_inside_loop(s.orelse, in_loop)))
    if isinstance(s, While):
        return _returns_inside_loop(s.body, True)
    return False


@dataclass
class CallGraph:
    nodes: Tuple[str, ...]
    edges: Dict[Tuple[str, str], List[CallSite]] = field(default_factory=dict)

    def edge_set(self):
        return set(self.edges)

    def callees(self, name):
        return sorted({b for (a, b) in self.edges if a == name})

    def recursive(self, name) -> bool:
        return (name, name) in self.edges

    def components(self):
        """Strongly connected components (Tarjan), callees before callers."""
        index, low, stack, on, out = {}, {}, [], set(), []
        counter = [0]

        def visit(v):
            index[v] = low[v] = counter[0]
            counter[0] += 1
            stack.append(v)
            on.add(v)
            for w in self.callees(v):
                if w not in index:
                    visit(w)
                    low[v] = min(low[v], low[w])
                elif w in on:
                    low[v] = min(low[v], index[w])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(tuple(sorted(comp)))

        for v in self.nodes:
            if v not in index:
                visit(v)
        return out

    def bottom_up(self) -> List[str]:
        """Topological order over non-recursive edges, callees first."""
        return [c[0] for c in self.components()]


def call_graph(unit: SourceUnit) -> CallGraph:
    g = CallGraph(unit.names)
    for f in unit.functions:
        for i, c in enumerate(calls_in(f)):
            if c.name in unit:
                g.edges.setdefault((f.name, c.name), []).append(CallSite(i, c.name, c.args))
    for comp in g.components():
        if len(comp) > 1:
            raise MutualRecursionUnsupported(comp[0], "cycle " + " -> ".join(comp))
    return g


def typecheck(unit: SourceUnit, allow_reserved: bool = False) -> SourceUnit:
    seen = set()
    arities = {}
    for e in unit.externs:
        arities[e.name] = e.arity
    for f in unit.functions:
        if f.name in seen or f.name in arities:
            raise DuplicateFunction(f.name)
        seen.add(f.name)
        arities[f.name] = f.arity
        if len(set(f.params)) != len(f.params):
            raise DuplicateFunction(f.name, "duplicate parameter")
    for f in unit.functions:
        if not allow_reserved and f.name.startswith(RESERVED_PREFIX):
            raise ReservedIdentifier(f.name)
        for c in calls_in(f):
            if c.name == NONDET:
                if not allow_reserved:
                    raise ReservedIdentifier(NONDET, "nondet() only appears in generated code")
                continue
            if c.name not in arities:
                if allow_reserved and c.name.startswith(RESERVED_PREFIX):
                    continue  # instrumentation builtin understood by the engines
                raise UndefinedCallee(c.name)
            if arities[c.name] != len(c.args):
                raise ArityMismatch(c.name, f"expected {arities[c.name]} args, got {len(c.args)}")
        if not allow_reserved and _has_verification_stmt(f.body):
            raise ReservedIdentifier("assume", f"assume/assert in {f.name} is reserved for "
                                               "generated code")
        _check_vars(f)
        if not always_returns(f.body):
            raise MissingReturn(f.name)
        if _returns_inside_loop(f.body):
            raise UnsupportedConstruct(f.name, "return inside a loop body")
    call_graph(unit)
    return unit
