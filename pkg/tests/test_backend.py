import itertools

import pytest
from hypothesis import given, settings, strategies as st

from recveq.backend import terms as T
from recveq.backend import (Counterexample, Formula, Valid, check_valid, emit_smtlib,
                            free_bit_count, model_satisfies, recording, solve, unwind)
from recveq.backend.sat import SatSolver
from recveq.config import DEFAULT
from recveq.lang import load
from recveq.oracle import Interpreter, c_div, c_mod, wrap

W = 4
x, y = T.var("x", W), T.var("y", W)

BIN = {
    "add": (T.add, lambda a, b: a + b),
    "sub": (T.sub, lambda a, b: a - b),
    "mul": (T.mul, lambda a, b: a * b),
    "and": (T.bvand, lambda a, b: a & b),
    "div": (T.sdiv, lambda a, b: c_div(a, b) if b else 0),
    "rem": (T.srem, lambda a, b: c_mod(a, b) if b else 0),
}


@st.composite
def int_terms(draw, depth=3):
    """A term and the Python function computing it."""
    if depth == 0 or draw(st.integers(0, 3)) == 0:
        leaf = draw(st.sampled_from(["x", "y", "c"]))
        if leaf == "c":
            k = draw(st.integers(-8, 7))
            return T.const(k, W), lambda a, b: k
        return (x, lambda a, b: a) if leaf == "x" else (y, lambda a, b: b)
    kind = draw(st.sampled_from(sorted(BIN) + ["neg", "ite"]))
    t1, f1 = draw(int_terms(depth=depth - 1))
    if kind == "neg":
        return T.neg(t1), lambda a, b: -f1(a, b)
    t2, f2 = draw(int_terms(depth=depth - 1))
    if kind == "ite":
        c, fc = draw(bool_terms(depth=1))
        return T.ite(c, t1, t2), lambda a, b: f1(a, b) if fc(a, b) else f2(a, b)
    mk, py = BIN[kind]
    return mk(t1, t2), lambda a, b: py(wrap(f1(a, b), W), wrap(f2(a, b), W))


@st.composite
def bool_terms(draw, depth=2):
    if depth == 0 or draw(st.booleans()):
        t1, f1 = draw(int_terms(depth=2))
        t2, f2 = draw(int_terms(depth=2))
        kind = draw(st.sampled_from(["eq", "slt", "sle"]))
        mk = {"eq": T.eq, "slt": T.slt, "sle": T.sle}[kind]
        py = {"eq": lambda a, b: a == b, "slt": lambda a, b: a < b,
              "sle": lambda a, b: a <= b}[kind]
        return mk(t1, t2), lambda a, b: py(wrap(f1(a, b), W), wrap(f2(a, b), W))
    c1, g1 = draw(bool_terms(depth=depth - 1))
    c2, g2 = draw(bool_terms(depth=depth - 1))
    kind = draw(st.sampled_from(["and", "or", "not"]))
    if kind == "not":
        return T.not_(c1), lambda a, b: not g1(a, b)
    if kind == "and":
        return T.and_(c1, c2), lambda a, b: g1(a, b) and g2(a, b)
    return T.or_(c1, c2), lambda a, b: g1(a, b) or g2(a, b)


def all_inputs():
    half = 1 << (W - 1)
    return itertools.product(range(-half, half), repeat=2)


@settings(max_examples=200, deadline=None)
@given(int_terms())
def test_term_evaluation_matches_python(tf):
    t, f = tf
    for a, b in all_inputs():
        assert T.eval_scalar(t, {"x": a, "y": b}) == wrap(f(a, b), W)


@settings(max_examples=150, deadline=None)
@given(bool_terms())
def test_engines_agree_with_brute_force(cf):
    c, g = cf
    truth = [(a, b) for a, b in all_inputs() if g(a, b)]
    formula = Formula.of(c, var_order=("x", "y"))
    r1 = solve(formula, engine="enumerate")
    r2 = solve(formula, engine="satcore")
    assert r1.sat == r2.sat == bool(truth)
    for r in (r1, r2):
        if r.sat:
            assert model_satisfies(formula, r.model)
            assert g(r.model["x"], r.model["y"])


def test_enumerate_returns_first_in_zigzag_order():
    r = solve(Formula.of(T.slt(x, T.const(-2, W)), var_order=("x",)), engine="enumerate")
    assert r.model["x"] == -3


def test_uf_congruence():
    f = lambda t: T.uf("g", [t], W)
    # g(x) != g(y) forces x != y
    formula = Formula.of(T.ne(f(x), f(y)), T.eq(x, y))
    assert not solve(formula, engine="satcore").sat
    assert not solve(formula, engine="enumerate").sat
    r = solve(Formula.of(T.ne(f(x), f(y))), engine="satcore")
    assert r.sat and r.model["x"] != r.model["y"]
    assert r.model.uf("g", (r.model["x"],)) != r.model.uf("g", (r.model["y"],))


clauses = st.lists(st.lists(st.integers(1, 8).flatmap(
    lambda v: st.sampled_from([v, -v])), min_size=1, max_size=4), min_size=1, max_size=40)


@settings(max_examples=300, deadline=None)
@given(clauses)
def test_sat_core_vs_brute_force(cnf):
    s = SatSolver()
    for _ in range(8):
        s.new_var()
    for c in cnf:
        s.add_clause(c)
    result = s.solve()
    brute = any(all(any((lit > 0) == bits[abs(lit) - 1] for lit in c) for c in cnf)
                for bits in itertools.product([False, True], repeat=8))
    assert result == brute
    if result:
        assert all(any(s.model_value(lit) for lit in c) for c in cnf)


def test_sat_core_pigeonhole_unsat():
    # 5 pigeons, 4 holes
    s = SatSolver()
    v = {(p, h): s.new_var() for p in range(5) for h in range(4)}
    for p in range(5):
        s.add_clause([v[p, h] for h in range(4)])
    for h in range(4):
        for p, q in itertools.combinations(range(5), 2):
            s.add_clause([-v[p, h], -v[q, h]])
    assert s.solve() is False


def test_conflict_budget_reported():
    s = SatSolver()
    v = {(p, h): s.new_var() for p in range(9) for h in range(8)}
    for p in range(9):
        s.add_clause([v[p, h] for h in range(8)])
    for h in range(8):
        for p, q in itertools.combinations(range(9), 2):
            s.add_clause([-v[p, h], -v[q, h]])
    assert s.solve(conflict_limit=10) is None


PROG = """
int f(int n) {
    if (n <= 0) return 0;
    return 2 + f(n - 1);
}
int main(int n) {
    assume(n >= 0 && n < 5);
    assert(f(n) == n + n);
    return 0;
}
"""


def test_check_valid_bounded_proof():
    u = load(PROG, allow_reserved=True)
    assert isinstance(check_valid(u, "main", ["n"], DEFAULT, unwind=6), Valid)


def test_check_valid_counterexample_replays():
    u = load(PROG.replace("n + n", "n + n + (n == 3)"), allow_reserved=True)
    r = check_valid(u, "main", ["n"], DEFAULT, unwind=6)
    assert isinstance(r, Counterexample)
    assert r.input == (3,)


@pytest.mark.parametrize("uw", [1, 2, 3, 4, 5, 6])
@pytest.mark.parametrize("bound", [2, 3, 4, 5])
def test_literal_unwind_matches_encoder_bound(uw, bound):
    # both discard executions deeper than uw, so they must agree on validity
    src = PROG.replace("n < 5", f"n < {bound}").replace("n + n", "n + n + (n == 4)")
    u = load(src, allow_reserved=True)
    internal = check_valid(u, "main", ["n"], DEFAULT, unwind=uw)
    literal = check_valid(unwind(u, uw), "main", ["n"], DEFAULT)
    assert type(internal) is type(literal)
    if isinstance(internal, Counterexample):
        assert internal.input == literal.input


def test_unwind_interpreted():
    u = load(PROG, allow_reserved=True)
    flat = Interpreter(unwind(u, 3))
    assert flat.run("f", [3]).value == 6
    assert type(flat.run("f", [4])).__name__ == "Blocked"


def test_recording_and_bits():
    with recording() as log:
        solve(Formula.of(T.slt(x, y)), engine="satcore")
    assert len(log) == 1 and log[0].free_bits == 2 * W
    assert free_bit_count(Formula.of(T.slt(x, y))) == 2 * W


def test_enumerate_refuses_large_spaces():
    big = T.var("z", 32)
    with pytest.raises(ValueError):
        solve(Formula.of(T.eq(big, T.const(3, 32))), engine="enumerate")


def test_smtlib_text():
    g = T.uf("g", [x], W)
    text = emit_smtlib(Formula.of(T.slt(g, y)))
    assert "(declare-fun g ((_ BitVec 4)) (_ BitVec 4))" in text
    assert "bvslt" in text and "(check-sat)" in text
