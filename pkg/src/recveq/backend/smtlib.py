"""SMT-LIB v2 text for formulas (QF_BV, or QF_UFBV when UF symbols occur)."""
from __future__ import annotations

from typing import Dict, List

from .terms import BOOL, Term, topo, uf_apps

_OPS = {"add": "bvadd", "neg": "bvneg", "mul": "bvmul", "bvand": "bvand", "not": "not",
        "and": "and", "or": "or", "eq": "=", "slt": "bvslt", "sle": "bvsle", "ite": "ite"}


def _const(value: int, width: int) -> str:
    return f"(_ bv{value & ((1 << width) - 1)} {width})"


def _sort(width: int) -> str:
    return "Bool" if width == BOOL else f"(_ BitVec {width})"


def _sym(name: str) -> str:
    plain = all(c.isalnum() or c in "_.@#$%^&*+-/<>=!?~" for c in name) and not name[0].isdigit()
    return name if plain else f"|{name}|"


def _render(t: Term, ref) -> str:
    op = t.op
    if op == "const":
        return _const(t.val, t.width)
    if op == "bconst":
        return "true" if t.val else "false"
    if op == "var":
        return _sym(t.val)
    args = [ref(a) for a in t.args]
    if op == "uf":
        return f"({_sym(t.val)} {' '.join(args)})" if args else _sym(t.val)
    if op in ("sdiv", "srem"):
        # division by zero is 0 in the source language, unlike bvsdiv
        a, b = args
        zero = _const(0, t.width)
        fn = "bvsdiv" if op == "sdiv" else "bvsrem"
        return f"(ite (= {b} {zero}) {zero} ({fn} {a} {b}))"
    return f"({_OPS[op]} {' '.join(args)})"


def term_str(t: Term) -> str:
    """Inline rendering (no sharing); meant for small terms and diagnostics."""
    memo: Dict[int, str] = {}
    for s in topo([t]):
        memo[s.id] = _render(s, lambda a: memo[a.id])
    return memo[t.id]


def emit_smtlib(formula) -> str:
    """Render ``formula`` as a satisfiability script.

    Every inner DAG node becomes a ``define-fun``, so the text stays linear
    in the DAG size and symbol naming is deterministic.
    """
    roots = list(formula.constraints)
    nodes = topo(roots)
    ufs = uf_apps(roots)
    logic = "QF_UFBV" if ufs else "QF_BV"
    lines: List[str] = [f"(set-logic {logic})", "(set-option :produce-models true)"]
    names: Dict[int, str] = {}
    for t in nodes:
        if t.op == "var":
            lines.append(f"(declare-fun {_sym(t.val)} () {_sort(t.width)})")
    declared = set()
    for t in ufs:
        if t.val not in declared:
            declared.add(t.val)
            dom = " ".join(_sort(a.width) for a in t.args)
            lines.append(f"(declare-fun {_sym(t.val)} ({dom}) {_sort(t.width)})")
    counter = 0
    for t in nodes:
        if t.op in ("var", "const", "bconst"):
            continue
        name = f"t!{counter}"
        counter += 1
        body = _render(t, lambda a: names.get(a.id) or _render(a, None))
        lines.append(f"(define-fun {name} () {_sort(t.width)} {body})")
        names[t.id] = name
    for r in roots:
        ref = names.get(r.id) or _render(r, None)
        lines.append(f"(assert {ref})")
    lines.append("(check-sat)")
    lines.append("(exit)")
    return "\n".join(lines) + "\n"
