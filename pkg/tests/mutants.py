"""Single-edit mutants of corpus functions, for soundness batteries."""
from dataclasses import replace

from recveq.lang.ast import Binary, IntLit, SourceUnit, map_expr, map_stmt_exprs, renumber_calls
from recveq.lang.check import typecheck

SWAPS = {"<": "<=", "<=": "<", ">": ">=", ">=": ">", "==": "!=", "!=": "==",
         "+": "-", "-": "+", "&&": "||", "||": "&&"}


def edits(e):
    """Replacements for a single node."""
    if isinstance(e, IntLit):
        yield replace(e, value=e.value + 1)
        yield replace(e, value=e.value - 1)
    elif isinstance(e, Binary) and e.op in SWAPS:
        yield replace(e, op=SWAPS[e.op])


def _rewrite(f, target, choice):
    seen = [0]

    def fn(e):
        k = seen[0]
        seen[0] += 1
        if k == target:
            return list(edits(e))[choice]
        return e

    body = map_stmt_exprs(f.body, lambda e: map_expr(e, fn))
    return renumber_calls(replace(f, body=body)), seen[0]


def sites(f):
    """(node index, edit index) for every possible single edit of ``f``."""
    nodes = []
    map_stmt_exprs(f.body, lambda e: map_expr(e, lambda x: nodes.append(x) or x))
    return [(k, j) for k, node in enumerate(nodes) for j in range(len(list(edits(node))))]


def mutate(unit: SourceUnit, name: str, site) -> SourceUnit:
    f = unit.function(name)
    g, _ = _rewrite(f, *site)
    funcs = tuple(g if h.name == name else h for h in unit.functions)
    return typecheck(SourceUnit(funcs, unit.externs), allow_reserved=True)


def all_mutants(unit: SourceUnit, name: str):
    for site in sites(unit.function(name)):
        yield site, mutate(unit, name, site)
