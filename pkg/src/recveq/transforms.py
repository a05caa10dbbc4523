"""Program rewrites used by the proof rules.

Unrolling along a pruned call tree, call substitution (shared UF symbol,
return-zero stub, assume-false stub), engine-owned assumptions and
base-case flag instrumentation.  All rewrites are literal: they produce
ordinary mini-language functions that the interpreter can run.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .errors import ArityMismatch, FreeVariable
from .lang.ast import (RESERVED_PREFIX, Assume, Binary, Block, Call, Expr, ExprStmt, Extern,
                       FunctionDef, If, IntLit, Return, SourceUnit, Unary, Var, calls_in, free_vars,
                       map_expr, map_stmt_exprs, renumber_calls)
from .lang.check import recursive_call_sites
from .oracle import GET_FLAG, SET_FLAG

RET = RESERVED_PREFIX + "ret"
BLOCK = RESERVED_PREFIX + "block"
MAIN = RESERVED_PREFIX + "main"


# -- pruned call trees ----------------------------------------------------------------

@dataclass(frozen=True)
class Leaf:
    def __repr__(self):
        return "L"


@dataclass(frozen=True)
class Expand:
    children: Tuple["Tree", ...]

    def __repr__(self):
        return "E[" + ", ".join(map(repr, self.children)) + "]"


Tree = Union[Leaf, Expand]
LEAF = Leaf()


def expand_all(c: int) -> Expand:
    return Expand((LEAF,) * c)


def tree_size(t: Tree) -> int:
    """Number of Expand nodes."""
    return 0 if isinstance(t, Leaf) else 1 + sum(tree_size(c) for c in t.children)


def tree_depth(t: Tree) -> int:
    return 0 if isinstance(t, Leaf) else 1 + max((tree_depth(c) for c in t.children), default=0)


def normalize(t: Tree) -> Tree:
    """Collapse a root ``Expand`` whose children are all leaves to ``Leaf``.

    Both mean "the top frame's calls stay recursive", so callers compare
    trees after normalizing.
    """
    if isinstance(t, Expand) and all(isinstance(c, Leaf) for c in t.children):
        return LEAF
    return t


def decisions(t: Tree, c: int) -> List[dict]:
    """Flatten a tree into (depth, site, path, action) records, pre-order."""
    out = []

    def walk(node, depth, site, path):
        if isinstance(node, Leaf):
            out.append({"depth": depth, "site": site, "path": list(path), "action": "leaf"})
            return
        out.append({"depth": depth, "site": site, "path": list(path), "action": "expand"})
        for i, ch in enumerate(node.children):
            walk(ch, depth + 1, i, path + (i,))

    walk(t if not isinstance(t, Leaf) else expand_all(c), 0, -1, ())
    return out


def from_decisions(items: Sequence[dict]) -> Tree:
    """Inverse of ``decisions``; paths identify nodes, missing ones are leaves."""
    expanded = {tuple(d["path"]) for d in items if d["action"] == "expand"}
    width: Dict[tuple, int] = {}
    for d in items:
        p = tuple(d["path"])
        if p:
            width[p[:-1]] = max(width.get(p[:-1], 0), p[-1] + 1)

    def build(path):
        if path not in expanded:
            return LEAF
        return Expand(tuple(build(path + (i,)) for i in range(width.get(path, 0))))

    return build(())


def render_tree(t: Tree, name: str, c: int) -> str:
    """Indented text form, one node per line."""
    lines = []

    def walk(node, depth, label):
        kind = "leaf" if isinstance(node, Leaf) else "expand"
        lines.append("  " * depth + f"{label}: {kind}")
        if isinstance(node, Expand):
            for i, ch in enumerate(node.children):
                walk(ch, depth + 1, f"site {i}")

    walk(t if not isinstance(t, Leaf) else expand_all(c), 0, name)
    return "\n".join(lines)


@dataclass(frozen=True)
class SyncUnrolling:
    side1: Tree
    side2: Tree

    def side(self, i: int) -> Tree:
        return self.side1 if i == 1 else self.side2

    def to_json(self, c1: int, c2: int) -> list:
        return [{"side": 1, "decisions": decisions(self.side1, c1)},
                {"side": 2, "decisions": decisions(self.side2, c2)}]

    @staticmethod
    def from_json(data) -> "SyncUnrolling":
        if isinstance(data, dict):
            data = data.get("su", data.get("sides"))
        sides = {d["side"]: normalize(from_decisions(d["decisions"])) for d in data}
        return SyncUnrolling(sides.get(1, LEAF), sides.get(2, LEAF))


NO_UNROLLING = SyncUnrolling(LEAF, LEAF)


# -- unrolling ------------------------------------------------------------------------------

def _redirect_recursive(f: FunctionDef, targets: Sequence[str], name: str) -> FunctionDef:
    """Clone ``f`` as ``name``; the i-th recursive call goes to ``targets[i]``."""
    order = {id(c): i for i, c in enumerate(c for c in calls_in(f) if c.name == f.name)}

    def rewrite(e):
        if isinstance(e, Call):
            args = tuple(rewrite(a) for a in e.args)
            if e.name == f.name:
                return replace(e, name=targets[order[id(e)]], args=args)
            return replace(e, args=args)
        if isinstance(e, Unary):
            return replace(e, operand=rewrite(e.operand))
        if isinstance(e, Binary):
            return replace(e, left=rewrite(e.left), right=rewrite(e.right))
        return e

    body = map_stmt_exprs(f.body, rewrite)
    return renumber_calls(FunctionDef(name, f.params, body, pos=f.pos))


def apply_unrolling(f: FunctionDef, tree: Tree) -> List[FunctionDef]:
    """Materialize ``tree`` as clones ``f, f_, f__, ...`` (pre-order).

    Children of an Expand node correspond to the textual recursive call
    sites of ``f``; an expanded child calls a fresh clone, a leaf child
    keeps calling ``f`` (the entry clone), so the result is still a
    faithful recursion.
    """
    c = len(recursive_call_sites(f))
    tree = normalize(tree)
    if isinstance(tree, Leaf):
        return [f]
    out: List[FunctionDef] = []

    def build(node: Expand) -> str:
        if len(node.children) != c:
            raise ArityMismatch(f.name, f"tree node has {len(node.children)} children, "
                                        f"function has {c} recursive call sites")
        slot = len(out)
        name = f.name + "_" * slot
        out.append(None)  # reserve the pre-order slot before visiting children
        targets = [f.name if isinstance(ch, Leaf) else build(ch) for ch in node.children]
        out[slot] = _redirect_recursive(f, targets, name)
        return name

    build(tree)
    return out


# -- call substitution ----------------------------------------------------------------------

@dataclass(frozen=True)
class UF:
    symbol: str = "UF"


@dataclass(frozen=True)
class RetZero:
    pass


@dataclass(frozen=True)
class AssumeFalse:
    pass


SubstitutionMode = Union[UF, RetZero, AssumeFalse]


def stub_name(mode: SubstitutionMode) -> str:
    if isinstance(mode, UF):
        return mode.symbol
    return RET if isinstance(mode, RetZero) else BLOCK


def stub_function(mode: SubstitutionMode, arity: int) -> Optional[FunctionDef]:
    """The generated callee for a stub mode (None for UF: it stays a prototype)."""
    params = tuple(f"a{i}" for i in range(arity))
    if isinstance(mode, RetZero):
        return FunctionDef(RET, params, Block((Return(IntLit(0)),)))
    if isinstance(mode, AssumeFalse):
        return FunctionDef(BLOCK, params, Block((Assume(IntLit(0)), Return(IntLit(0)))))
    return None


def substitute_calls(f: FunctionDef, targets: Iterable[str], mode: SubstitutionMode) -> FunctionDef:
    targets = set(targets)
    new = stub_name(mode)

    def fn(e):
        if isinstance(e, Call) and e.name in targets:
            return replace(e, name=new)
        return e

    body = map_stmt_exprs(f.body, lambda e: map_expr(e, fn))
    if body == f.body:
        return f
    return replace(f, body=body)


def with_stub(functions: Sequence[FunctionDef], mode: SubstitutionMode, arity: int,
              externs: Sequence[Extern] = ()) -> SourceUnit:
    """Bundle functions with the stub (or UF prototype) their calls now need."""
    funcs = list(functions)
    ext = list(externs)
    stub = stub_function(mode, arity)
    if stub is not None:
        if all(g.name != stub.name for g in funcs):
            funcs.append(stub)
    elif all(e.name != mode.symbol for e in ext):
        ext.append(Extern(mode.symbol, arity))
    return SourceUnit(tuple(funcs), tuple(ext))


# -- assumptions and flags ------------------------------------------------------------------

def _is_marked(s) -> bool:
    return isinstance(s, Assume) and s.marked


def add_assumption(f: FunctionDef, p: Expr, replace_existing: bool = True) -> FunctionDef:
    """Insert ``assume(p)`` as the first statement of every frame of ``f``."""
    unknown = free_vars(p) - set(f.params)
    if unknown:
        raise FreeVariable(sorted(unknown)[0], f"assumption over {f.name}")
    stmts = list(f.body.stmts)
    if replace_existing:
        stmts = [s for s in stmts if not _is_marked(s)]
    if p == IntLit(1):
        new = stmts
    else:
        new = [Assume(p, marked=True)] + stmts
    return replace(f, body=replace(f.body, stmts=tuple(new)))


def strip_assumptions(f: FunctionDef) -> FunctionDef:
    return replace(f, body=replace(f.body, stmts=tuple(s for s in f.body.stmts if not _is_marked(s))))


def assumption_of(f: FunctionDef) -> Optional[Expr]:
    for s in f.body.stmts:
        if _is_marked(s):
            return s.cond
    return None


@dataclass(frozen=True)
class Instrumented:
    """Clones plus a wrapper main that runs the entry and assumes the flag."""
    functions: Tuple[FunctionDef, ...]
    entry: str
    main: FunctionDef

    def unit(self, externs: Sequence[Extern] = ()) -> SourceUnit:
        return SourceUnit(self.functions + (self.main,), tuple(externs))


def instrument_bc_flag(clones: Sequence[FunctionDef], rho: Expr) -> Instrumented:
    """Every clone raises the shared base-case flag when ``rho`` holds on entry."""
    set_flag = If(rho, ExprStmt(Call(SET_FLAG, ())))
    out = []
    for g in clones:
        out.append(renumber_calls(replace(g, body=replace(g.body, stmts=(set_flag,) + g.body.stmts))))
    entry = clones[0]
    params = entry.params
    main = FunctionDef(MAIN, params, Block((
        ExprStmt(Call(entry.name, tuple(Var(p) for p in params))),
        Assume(Call(GET_FLAG, ())),
        Return(IntLit(0)),
    )))
    return Instrumented(tuple(out), entry.name, renumber_calls(main))
