"""Hash-consed bit-vector and boolean terms.

Every term is built through a smart constructor that folds constants and
normalizes linear offsets (``x + c``), so structurally equal terms are the
same Python object and many comparisons between call arguments disappear
before a solver ever sees them.  Booleans have width 0.
"""
from __future__ import annotations

import weakref
from typing import Dict, Iterable, List, Sequence

import numpy as np

BOOL = 0


class Term:
    __slots__ = ("op", "args", "width", "val", "id", "__weakref__")

    def __init__(self, op, args, width, val, ident):
        self.op = op
        self.args = args
        self.width = width
        self.val = val
        self.id = ident

    @property
    def is_bool(self) -> bool:
        return self.width == BOOL

    @property
    def is_const(self) -> bool:
        return self.op in ("const", "bconst")

    def __repr__(self):
        from .smtlib import term_str
        return f"Term({term_str(self)})"

    def __lt__(self, other):
        return self.id < other.id


_table: "weakref.WeakValueDictionary" = weakref.WeakValueDictionary()
_next_id = [0]


def _mk(op, args=(), width=BOOL, val=None) -> Term:
    key = (op, tuple(a.id for a in args), width, val)
    t = _table.get(key)
    if t is None:
        t = Term(op, tuple(args), width, val, _next_id[0])
        _next_id[0] += 1
        _table[key] = t
    return t


def wrap(x: int, width: int) -> int:
    half = 1 << (width - 1)
    return ((x + half) & ((1 << width) - 1)) - half


def c_div(a: int, b: int) -> int:
    if b == 0:
        return 0
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def c_mod(a: int, b: int) -> int:
    return 0 if b == 0 else a - c_div(a, b) * b


# -- leaves --------------------------------------------------------------------

TRUE = _mk("bconst", (), BOOL, True)
FALSE = _mk("bconst", (), BOOL, False)
# module-level references keep the two constants alive in the weak table
_KEEP = (TRUE, FALSE)


def boolc(b: bool) -> Term:
    return TRUE if b else FALSE


def const(value: int, width: int) -> Term:
    return _mk("const", (), width, wrap(int(value), width))


def var(name: str, width: int) -> Term:
    return _mk("var", (), width, name)


def uf(name: str, args: Sequence[Term], width: int) -> Term:
    return _mk("uf", tuple(args), width, name)


# -- bit-vector operations ------------------------------------------------------

def _offset(t: Term):
    """Split ``t`` into (base, constant) with base None for constants."""
    if t.op == "const":
        return None, t.val
    if t.op == "add" and t.args[1].op == "const":
        return t.args[0], t.args[1].val
    return t, 0


def add(a: Term, b: Term) -> Term:
    W = a.width
    if a.op == "const" and b.op == "const":
        return const(a.val + b.val, W)
    if a.op == "const":
        a, b = b, a
    xa, ca = _offset(a)
    xb, cb = _offset(b)
    c = wrap(ca + cb, W)
    if xb is None:
        base = xa
    elif xa.id <= xb.id:
        base = _mk("add", (xa, xb), W)
    else:
        base = _mk("add", (xb, xa), W)
    if c == 0:
        return base
    return _mk("add", (base, const(c, W)), W)


def neg(a: Term) -> Term:
    W = a.width
    if a.op == "const":
        return const(-a.val, W)
    if a.op == "neg":
        return a.args[0]
    x, c = _offset(a)
    if c != 0:
        return add(neg(x), const(-c, W))
    return _mk("neg", (a,), W)


def sub(a: Term, b: Term) -> Term:
    return add(a, neg(b))


def mul(a: Term, b: Term) -> Term:
    W = a.width
    if a.op == "const" and b.op == "const":
        return const(a.val * b.val, W)
    if a.op == "const" or (b.op != "const" and b.id < a.id):
        a, b = b, a
    if b.op == "const":
        if b.val == 0:
            return b
        if b.val == 1:
            return a
        if b.val == -1:
            return neg(a)
    return _mk("mul", (a, b), W)


def sdiv(a: Term, b: Term) -> Term:
    W = a.width
    if a.op == "const" and b.op == "const":
        return const(c_div(a.val, b.val), W)
    if b.op == "const":
        if b.val == 0:
            return const(0, W)
        if b.val == 1:
            return a
    return _mk("sdiv", (a, b), W)


def srem(a: Term, b: Term) -> Term:
    W = a.width
    if a.op == "const" and b.op == "const":
        return const(c_mod(a.val, b.val), W)
    if b.op == "const" and b.val in (0, 1, -1):
        return const(0, W)
    return _mk("srem", (a, b), W)


def bvand(a: Term, b: Term) -> Term:
    W = a.width
    if a.op == "const" and b.op == "const":
        return const(a.val & b.val, W)
    if a.op == "const" or (b.op != "const" and b.id < a.id):
        a, b = b, a
    if b.op == "const":
        if b.val == 0:
            return b
        if b.val == -1:
            return a
    if a is b:
        return a
    return _mk("bvand", (a, b), W)


def ite(c: Term, a: Term, b: Term) -> Term:
    if c is TRUE or a is b:
        return a
    if c is FALSE:
        return b
    if c.op == "not":
        c, a, b = c.args[0], b, a
    if a.is_bool:
        if a is TRUE and b is FALSE:
            return c
        if a is FALSE and b is TRUE:
            return not_(c)
        if a is TRUE:
            return or_(c, b)
        if b is FALSE:
            return and_(c, a)
    return _mk("ite", (c, a, b), a.width)


# -- predicates -----------------------------------------------------------------

def not_(a: Term) -> Term:
    if a.op == "bconst":
        return boolc(not a.val)
    if a.op == "not":
        return a.args[0]
    return _mk("not", (a,), BOOL)


def and_(a: Term, b: Term) -> Term:
    if a is FALSE or b is FALSE:
        return FALSE
    if a is TRUE:
        return b
    if b is TRUE or a is b:
        return a
    if (a.op == "not" and a.args[0] is b) or (b.op == "not" and b.args[0] is a):
        return FALSE
    if b.id < a.id:
        a, b = b, a
    return _mk("and", (a, b), BOOL)


def or_(a: Term, b: Term) -> Term:
    if a is TRUE or b is TRUE:
        return TRUE
    if a is FALSE:
        return b
    if b is FALSE or a is b:
        return a
    if (a.op == "not" and a.args[0] is b) or (b.op == "not" and b.args[0] is a):
        return TRUE
    if b.id < a.id:
        a, b = b, a
    return _mk("or", (a, b), BOOL)


def implies(a: Term, b: Term) -> Term:
    return or_(not_(a), b)


def all_(terms: Iterable[Term]) -> Term:
    out = TRUE
    for t in terms:
        out = and_(out, t)
    return out


def any_(terms: Iterable[Term]) -> Term:
    out = FALSE
    for t in terms:
        out = or_(out, t)
    return out


def eq(a: Term, b: Term) -> Term:
    if a is b:
        return TRUE
    if a.is_bool:
        if a.op == "bconst":
            a, b = b, a
        if b.op == "bconst":
            return a if b.val else not_(a)
        if b.id < a.id:
            a, b = b, a
        return _mk("eq", (a, b), BOOL)
    if a.op == "const" and b.op == "const":
        return boolc(a.val == b.val)
    if a.op == "const":
        a, b = b, a
    # ite of constants against a constant collapses to its condition
    if b.op == "const" and a.op == "ite" and a.args[1].op == "const" and a.args[2].op == "const":
        hit1, hit2 = a.args[1].val == b.val, a.args[2].val == b.val
        if hit1 and hit2:
            return TRUE
        if hit1:
            return a.args[0]
        if hit2:
            return not_(a.args[0])
        return FALSE
    xa, ca = _offset(a)
    xb, cb = _offset(b)
    if xa is xb:
        return boolc(ca == cb)
    if xb is None:
        # x + c == k  <=>  x == k - c  (modular arithmetic is a group)
        if ca != 0:
            return eq(xa, const(cb - ca, a.width))
        return _mk("eq", (a, b), BOOL)
    if b.id < a.id:
        a, b = b, a
    return _mk("eq", (a, b), BOOL)


def ne(a: Term, b: Term) -> Term:
    return not_(eq(a, b))


def slt(a: Term, b: Term) -> Term:
    if a is b:
        return FALSE
    if a.op == "const" and b.op == "const":
        return boolc(a.val < b.val)
    return _mk("slt", (a, b), BOOL)


def sle(a: Term, b: Term) -> Term:
    if a is b:
        return TRUE
    if a.op == "const" and b.op == "const":
        return boolc(a.val <= b.val)
    return _mk("sle", (a, b), BOOL)


# -- bool <-> int bridging for the C-like source language ----------------------

def to_bool(t: Term) -> Term:
    if t.is_bool:
        return t
    return ne(t, const(0, t.width))


def to_int(t: Term, width: int) -> Term:
    if not t.is_bool:
        return t
    return ite(t, const(1, width), const(0, width))


# -- generic rebuild and traversal ----------------------------------------------

_BUILDERS = {
    "add": add, "neg": neg, "mul": mul, "sdiv": sdiv, "srem": srem, "bvand": bvand,
    "ite": ite, "not": not_, "and": and_, "or": or_, "eq": eq, "slt": slt, "sle": sle,
}


def rebuild(t: Term, args: Sequence[Term]) -> Term:
    if all(x is y for x, y in zip(args, t.args)):
        return t
    if t.op == "uf":
        return uf(t.val, args, t.width)
    return _BUILDERS[t.op](*args)


def topo(roots: Iterable[Term]) -> List[Term]:
    """Post-order over the DAG below ``roots`` (children first, no repeats)."""
    seen = set()
    out = []
    for r in roots:
        if r.id in seen:
            continue
        stack = [(r, False)]
        while stack:
            t, done = stack.pop()
            if done:
                out.append(t)
                continue
            if t.id in seen:
                continue
            seen.add(t.id)
            stack.append((t, True))
            for a in reversed(t.args):
                if a.id not in seen:
                    stack.append((a, False))
    return out


def substitute(roots: Sequence[Term], mapping: Dict[int, Term]) -> List[Term]:
    """Replace terms by id (bottom-up), re-simplifying on the way."""
    memo: Dict[int, Term] = {}
    for t in topo(roots):
        if t.id in mapping:
            memo[t.id] = mapping[t.id]
        elif t.args:
            memo[t.id] = rebuild(t, [memo[a.id] for a in t.args])
        else:
            memo[t.id] = t
    return [memo[r.id] for r in roots]


def free_vars(roots: Iterable[Term]) -> List[Term]:
    return [t for t in topo(roots) if t.op == "var"]


def uf_apps(roots: Iterable[Term]) -> List[Term]:
    return [t for t in topo(roots) if t.op == "uf"]


def size(roots: Iterable[Term]) -> int:
    return len(topo(roots))


# -- vectorized evaluation --------------------------------------------------------

def _npwrap(x, W):
    if W >= 64:
        return x
    half = np.int64(1 << (W - 1))
    mask = np.int64((1 << W) - 1)
    return ((x + half) & mask) - half


def _npdiv(a, b):
    zero = b == 0
    sb = np.where(zero, 1, b)
    q = np.abs(a) // np.abs(sb)
    q = np.where((a < 0) ^ (sb < 0), -q, q)
    return np.where(zero, 0, q)


def evaluate(roots: Sequence[Term], env: Dict[str, object], ufs=None):
    """Evaluate terms on numpy arrays (or scalars) of variable values.

    ``env`` maps variable names to int64 arrays (booleans for width-0
    variables); missing variables evaluate to 0/false.  ``ufs`` optionally
    answers ``(name, arg_values)`` for UF applications on scalars.
    """
    memo: Dict[int, object] = {}
    with np.errstate(over="ignore"):
        for t in topo(roots):
            op = t.op
            W = t.width
            if op == "const":
                v = np.int64(t.val)
            elif op == "bconst":
                v = np.bool_(t.val)
            elif op == "var":
                v = env.get(t.val)
                if v is None:
                    v = np.bool_(False) if W == BOOL else np.int64(0)
            elif op == "uf":
                if ufs is None:
                    raise ValueError("UF application needs a UF interpretation")
                args = tuple(int(memo[a.id]) for a in t.args)
                v = np.int64(wrap(int(ufs(t.val, args)), W))
            else:
                a = [memo[x.id] for x in t.args]
                if op == "add":
                    v = _npwrap(a[0] + a[1], W)
                elif op == "neg":
                    v = _npwrap(-a[0], W)
                elif op == "mul":
                    v = _npwrap(a[0] * a[1], W)
                elif op == "sdiv":
                    v = _npwrap(_npdiv(a[0], a[1]), W)
                elif op == "srem":
                    v = np.where(a[1] == 0, 0, _npwrap(a[0] - _npdiv(a[0], a[1]) * a[1], W))
                elif op == "bvand":
                    v = a[0] & a[1]
                elif op == "ite":
                    v = np.where(a[0], a[1], a[2])
                elif op == "not":
                    v = np.logical_not(a[0])
                elif op == "and":
                    v = np.logical_and(a[0], a[1])
                elif op == "or":
                    v = np.logical_or(a[0], a[1])
                elif op == "eq":
                    v = a[0] == a[1]
                elif op == "slt":
                    v = a[0] < a[1]
                elif op == "sle":
                    v = a[0] <= a[1]
                else:
                    raise ValueError(op)
            memo[t.id] = v
    return [memo[r.id] for r in roots]


def eval_scalar(t: Term, env: Dict[str, int], ufs=None):
    v = evaluate([t], {k: (np.bool_(x) if isinstance(x, bool) else np.int64(x))
                       for k, x in env.items()}, ufs)[0]
    return bool(v) if t.is_bool else int(v)
