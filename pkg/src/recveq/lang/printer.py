"""Canonical pretty-printer; ``parse(pretty(u)) == u`` for every unit."""
from __future__ import annotations

from .ast import (Assert, Assign, Assume, Binary, Block, Call, Decl, ExprStmt, Extern,
                  FunctionDef, If, IntLit, Return, SourceUnit, Unary, Var, While)

_PREC = {"||": 1, "&&": 2, "&": 3, "==": 4, "!=": 4, "<": 5, "<=": 5, ">": 5, ">=": 5,
         "+": 6, "-": 6, "*": 7, "/": 7, "%": 7}
_UNARY_PREC = 8

INDENT = "    "


def expr_str(e, parent_prec: int = 0) -> str:
    if isinstance(e, IntLit):
        s = str(e.value)
        # a negative literal as an operand binds like a unary minus
        return f"({s})" if e.value < 0 and parent_prec > _UNARY_PREC - 1 else s
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.name}({', '.join(expr_str(a) for a in e.args)})"
    if isinstance(e, Unary):
        inner = expr_str(e.operand, _UNARY_PREC)
        if e.op == "-" and inner.startswith("-"):
            inner = f"({inner})"
        s = f"{e.op}{inner}"
        return f"({s})" if parent_prec > _UNARY_PREC else s
    if isinstance(e, Binary):
        p = _PREC[e.op]
        # left-associative: the right operand needs strictly tighter binding
        s = f"{expr_str(e.left, p)} {e.op} {expr_str(e.right, p + 1)}"
        return f"({s})" if p < parent_prec else s
    raise TypeError(e)


def _stmt_lines(s, depth: int):
    pad = INDENT * depth
    if isinstance(s, Block):
        yield pad + "{"
        for t in s.stmts:
            yield from _stmt_lines(t, depth + 1)
        yield pad + "}"
    elif isinstance(s, Decl):
        yield pad + (f"int {s.name};" if s.init is None else f"int {s.name} = {expr_str(s.init)};")
    elif isinstance(s, Assign):
        yield pad + f"{s.name} = {expr_str(s.value)};"
    elif isinstance(s, Return):
        yield pad + f"return {expr_str(s.value)};"
    elif isinstance(s, Assume):
        yield pad + f"assume({expr_str(s.cond)});"
    elif isinstance(s, Assert):
        yield pad + f"assert({expr_str(s.cond)});"
    elif isinstance(s, ExprStmt):
        yield pad + f"{expr_str(s.expr)};"
    elif isinstance(s, If):
        yield pad + f"if ({expr_str(s.cond)})"
        yield from _branch(s.then, depth)
        if s.orelse is not None:
            yield pad + "else"
            yield from _branch(s.orelse, depth)
    elif isinstance(s, While):
        yield pad + f"while ({expr_str(s.cond)})"
        yield from _branch(s.body, depth)
    else:
        raise TypeError(s)


def _branch(s, depth):
    if isinstance(s, Block):
        yield from _stmt_lines(s, depth)
    else:
        yield from _stmt_lines(s, depth + 1)


def stmt_str(s, depth: int = 0) -> str:
    return "\n".join(_stmt_lines(s, depth))


def function_str(f: FunctionDef) -> str:
    params = ", ".join(f"int {p}" for p in f.params)
    lines = [f"int {f.name}({params})"] + list(_stmt_lines(f.body, 0))
    return "\n".join(lines)


def pretty(unit) -> str:
    """Print a SourceUnit, a FunctionDef, or a list of FunctionDefs."""
    if isinstance(unit, FunctionDef):
        return function_str(unit) + "\n"
    if isinstance(unit, SourceUnit):
        items = [f"int {e.name}({', '.join('int a%d' % i for i in range(e.arity))});"
                 for e in unit.externs]
        items += [function_str(f) for f in unit.functions]
    else:
        items = [e if isinstance(e, str) else function_str(e) for e in unit]
    return "\n\n".join(items) + ("\n" if items else "")


__all__ = ["pretty", "expr_str", "stmt_str", "function_str", "Extern"]
