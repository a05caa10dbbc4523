import json

import pytest
from hypothesis import given, settings, strategies as st

from recveq.errors import ArityMismatch, FreeVariable
from recveq.lang import calls_in, load, parse_expr
from recveq.oracle import Blocked, Interpreter, Value
from recveq.transforms import (LEAF, AssumeFalse, Expand, Leaf, RetZero, SyncUnrolling, UF,
                               add_assumption, apply_unrolling, assumption_of, decisions,
                               expand_all, from_decisions, instrument_bc_flag, normalize,
                               render_tree, strip_assumptions, substitute_calls, tree_depth,
                               tree_size, with_stub)


def trees(c, depth):
    if depth == 0:
        return st.just(LEAF)
    return st.one_of(st.just(LEAF),
                     st.tuples(*[trees(c, depth - 1)] * c).map(Expand))


def unrolled_interp(unit, name, tree):
    f = unit.function(name)
    clones = apply_unrolling(f, tree)
    rest = [g for g in unit.functions if g.name != name]
    return Interpreter(clones + rest)


def test_unroll_once_clone_names(fib):
    f1 = fib.function("f1")
    clones = apply_unrolling(f1, Expand((expand_all(2), LEAF)))
    assert [g.name for g in clones] == ["f1", "f1_"]
    # site 0 of the entry inlines the clone, site 1 stays recursive
    assert [c.name for c in calls_in(clones[0])] == ["f1_", "f1"]
    assert [c.name for c in calls_in(clones[1])] == ["f1", "f1"]


def test_leaf_unrolling_is_identity(fib):
    f2 = fib.function("f2")
    assert apply_unrolling(f2, LEAF) == [f2]
    assert apply_unrolling(f2, expand_all(3)) == [f2]


def test_wrong_child_count(fib):
    with pytest.raises(ArityMismatch):
        apply_unrolling(fib.function("f1"), Expand((expand_all(2), LEAF, LEAF)))


@settings(max_examples=40, deadline=None)
@given(trees(2, 3))
def test_unrolling_preserves_f1(fib, tree):
    plain = Interpreter(fib)
    unrolled = unrolled_interp(fib, "f1", tree)
    for n in range(-4, 14):
        assert unrolled.run("f1", [n]) == plain.run("f1", [n])


@settings(max_examples=25, deadline=None)
@given(trees(2, 2))
def test_unrolling_preserves_pascal(corpus, tree):
    u = corpus["pascal.mrc"]
    plain = Interpreter(u)
    unrolled = unrolled_interp(u, "p1", tree)
    for n in range(-1, 9):
        for m in range(-1, 9):
            assert unrolled.run("p1", [n, m]) == plain.run("p1", [n, m])


@given(trees(3, 3))
def test_decisions_roundtrip(tree):
    t = normalize(tree)
    back = from_decisions(json.loads(json.dumps(decisions(t, 3))))
    assert normalize(back) == t


def test_size_and_depth():
    t = Expand((Expand((LEAF, LEAF)), LEAF))
    assert tree_size(t) == 2 and tree_depth(t) == 2
    assert normalize(expand_all(4)) == LEAF
    assert render_tree(t, "f1", 2).splitlines()[0] == "f1: expand"


def test_su_json_roundtrip():
    su = SyncUnrolling(Expand((expand_all(2), LEAF)), LEAF)
    data = su.to_json(2, 3)
    assert data[1]["decisions"][0]["action"] == "expand"
    back = SyncUnrolling.from_json({"su": data})
    assert normalize(back.side1) == su.side1
    assert normalize(back.side2) == LEAF


def test_uf_substitution(fib):
    f = substitute_calls(fib.function("f1"), ["f1"], UF("U"))
    unit = with_stub([f], UF("U"), 1)
    i = Interpreter(unit, uf=lambda name, args: 50)
    assert i.run("f1", [5]) == Value(100)
    assert i.run("f1", [2]) == Value(1)


def test_stub_modes(fib):
    f = substitute_calls(fib.function("f1"), ["f1"], RetZero())
    i = Interpreter(with_stub([f], RetZero(), 1))
    assert i.run("f1", [9]) == Value(0)
    g = substitute_calls(fib.function("f1"), ["f1"], AssumeFalse())
    j = Interpreter(with_stub([g], AssumeFalse(), 1))
    assert j.run("f1", [9]) == Blocked()
    assert j.run("f1", [1]) == Value(1)


def test_assumptions_replace(sums):
    f = sums.function("sum1")
    a = add_assumption(f, parse_expr("n > 3"))
    b = add_assumption(a, parse_expr("n < 3"))
    assert assumption_of(b) == parse_expr("n < 3")
    assert sum(1 for s in b.body.stmts if getattr(s, "marked", False)) == 1
    assert strip_assumptions(b) == f
    with pytest.raises(FreeVariable):
        add_assumption(f, parse_expr("m > 0"))


def test_bc_flag_main(fib):
    f1 = fib.function("f1")
    inst = instrument_bc_flag([f1], parse_expr("n < 3"))
    i = Interpreter(inst.unit())
    # every run of f1 eventually reaches n < 3
    assert i.run(inst.main.name, [6]) == Value(0)
    u = load("int g(int n) { if (n > 100) return 0; return g(n + 1); }")
    inst = instrument_bc_flag([u.function("g")], parse_expr("n < -100"))
    assert Interpreter(inst.unit()).run(inst.main.name, [5]) == Blocked()
