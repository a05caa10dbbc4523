"""AST node types for the mini recursive language.

All nodes are frozen dataclasses.  Source positions are kept for
diagnostics but excluded from equality, so a pretty-print round trip
compares equal to the original tree.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Tuple, Union

RESERVED_PREFIX = "__rv_"

Pos = Optional[Tuple[int, int]]


def _pos():
    return field(default=None, compare=False, repr=False)


# -- expressions -------------------------------------------------------------

@dataclass(frozen=True)
class IntLit:
    value: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Unary:
    op: str  # '-', '!'
    operand: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Call:
    name: str
    args: Tuple["Expr", ...]
    # textual ordinal among all calls of the enclosing function; identifies
    # a frame's position in a call tree for nondet/replay bookkeeping
    site: int = field(default=-1, compare=False)
    pos: Pos = _pos()


Expr = Union[IntLit, Var, Unary, Binary, Call]

ARITH_OPS = ("+", "-", "*", "/", "%", "&")
CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")
LOGIC_OPS = ("&&", "||")
BINARY_OPS = ARITH_OPS + CMP_OPS + LOGIC_OPS

NONDET = "nondet"

# -- statements --------------------------------------------------------------


@dataclass(frozen=True)
class Decl:
    name: str
    init: Optional[Expr] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class Assign:
    name: str
    value: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Stmt"
    orelse: Optional["Stmt"] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class While:
    cond: Expr
    body: "Stmt"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Return:
    value: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class Assume:
    cond: Expr
    # engine-owned assumptions carry a marker so they can be replaced
    marked: bool = False
    pos: Pos = _pos()


@dataclass(frozen=True)
class Assert:
    cond: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class Block:
    stmts: Tuple["Stmt", ...]
    pos: Pos = _pos()


Stmt = Union[Decl, Assign, If, While, Return, Assume, Assert, ExprStmt, Block]


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: Tuple[str, ...]
    body: Block
    pos: Pos = _pos()

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class Extern:
    """A body-less prototype; calls to it are uninterpreted."""
    name: str
    arity: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class SourceUnit:
    functions: Tuple[FunctionDef, ...] = ()
    externs: Tuple[Extern, ...] = ()

    def function(self, name: str) -> FunctionDef:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(f.name == name for f in self.functions)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(f.name for f in self.functions)

    def extern_arities(self) -> dict:
        return {e.name: e.arity for e in self.externs}


# -- helpers -----------------------------------------------------------------

TRUE = IntLit(1)
FALSE = IntLit(0)


def sub_exprs(e: Expr) -> Iterator[Expr]:
    """Pre-order walk over an expression (outer nodes before inner ones)."""
    yield e
    if isinstance(e, Unary):
        yield from sub_exprs(e.operand)
    elif isinstance(e, Binary):
        yield from sub_exprs(e.left)
        yield from sub_exprs(e.right)
    elif isinstance(e, Call):
        for a in e.args:
            yield from sub_exprs(a)


def stmt_exprs(s: Stmt) -> Iterator[Expr]:
    """Top-level expressions of a statement tree, in textual order."""
    if isinstance(s, Decl):
        if s.init is not None:
            yield s.init
    elif isinstance(s, Assign):
        yield s.value
    elif isinstance(s, If):
        yield s.cond
        yield from stmt_exprs(s.then)
        if s.orelse is not None:
            yield from stmt_exprs(s.orelse)
    elif isinstance(s, While):
        yield s.cond
        yield from stmt_exprs(s.body)
    elif isinstance(s, (Return,)):
        yield s.value
    elif isinstance(s, (Assume, Assert)):
        yield s.cond
    elif isinstance(s, ExprStmt):
        yield s.expr
    elif isinstance(s, Block):
        for t in s.stmts:
            yield from stmt_exprs(t)


def calls_in(node) -> Iterator[Call]:
    """All calls in textual pre-order; accepts an Expr, Stmt or FunctionDef."""
    if isinstance(node, FunctionDef):
        node = node.body
    roots = [node] if not isinstance(node, (Decl, Assign, If, While, Return, Assume,
                                            Assert, ExprStmt, Block)) else stmt_exprs(node)
    for root in roots:
        for e in sub_exprs(root):
            if isinstance(e, Call):
                yield e


def free_vars(e: Expr) -> set:
    return {x.name for x in sub_exprs(e) if isinstance(x, Var)}


def map_expr(e: Expr, fn) -> Expr:
    """Bottom-up rebuild: ``fn`` sees each node after its children are mapped."""
    if isinstance(e, Unary):
        e = replace(e, operand=map_expr(e.operand, fn))
    elif isinstance(e, Binary):
        e = replace(e, left=map_expr(e.left, fn), right=map_expr(e.right, fn))
    elif isinstance(e, Call):
        e = replace(e, args=tuple(map_expr(a, fn) for a in e.args))
    return fn(e)


def map_stmt_exprs(s: Stmt, fn) -> Stmt:
    """Apply ``fn`` to every top-level expression of a statement tree."""
    if isinstance(s, Decl):
        return s if s.init is None else replace(s, init=fn(s.init))
    if isinstance(s, Assign):
        return replace(s, value=fn(s.value))
    if isinstance(s, If):
        return replace(s, cond=fn(s.cond), then=map_stmt_exprs(s.then, fn),
                       orelse=None if s.orelse is None else map_stmt_exprs(s.orelse, fn))
    if isinstance(s, While):
        return replace(s, cond=fn(s.cond), body=map_stmt_exprs(s.body, fn))
    if isinstance(s, Return):
        return replace(s, value=fn(s.value))
    if isinstance(s, (Assume, Assert)):
        return replace(s, cond=fn(s.cond))
    if isinstance(s, ExprStmt):
        return replace(s, expr=fn(s.expr))
    if isinstance(s, Block):
        return replace(s, stmts=tuple(map_stmt_exprs(t, fn) for t in s.stmts))
    raise TypeError(s)


def substitute(e: Expr, mapping: dict) -> Expr:
    """Replace variables by expressions (simultaneous substitution)."""
    def fn(x):
        if isinstance(x, Var) and x.name in mapping:
            return mapping[x.name]
        return x
    return map_expr(e, fn)


def renumber_calls(f: FunctionDef) -> FunctionDef:
    """Assign ``Call.site`` ordinals in textual pre-order."""
    counter = [0]

    def number(e):
        # pre-order numbering: number this call before its arguments
        if isinstance(e, Call):
            site = counter[0]
            counter[0] += 1
            return replace(e, site=site, args=tuple(number(a) for a in e.args))
        if isinstance(e, Unary):
            return replace(e, operand=number(e.operand))
        if isinstance(e, Binary):
            return replace(e, left=number(e.left), right=number(e.right))
        return e

    return replace(f, body=map_stmt_exprs(f.body, number))


def conj(parts) -> Expr:
    parts = [p for p in parts if p != TRUE]
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = Binary("&&", out, p)
    return out


def disj(parts) -> Expr:
    parts = [p for p in parts if p != FALSE]
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = Binary("||", out, p)
    return out


def negate(e: Expr) -> Expr:
    if e == TRUE:
        return FALSE
    if e == FALSE:
        return TRUE
    if isinstance(e, Unary) and e.op == "!":
        return e.operand
    return Unary("!", e)
