import pytest
from hypothesis import given, settings, strategies as st

from recveq.errors import (ArityMismatch, DuplicateFunction, MissingReturn,
                           MutualRecursionUnsupported, ParseError, ReservedIdentifier,
                           UndefinedCallee, UndefinedVariable)
from recveq.lang import call_graph, load, parse, parse_expr, pretty, recursive_call_sites, typecheck
from recveq.lang.printer import expr_str
from recveq.oracle import Value, eval, eval_expr


def test_roundtrip_corpus(corpus):
    for unit in corpus.values():
        text = pretty(unit)
        assert pretty(parse(text, allow_reserved=True)) == text


def test_precedence_of_bitand():
    # C precedence: == binds tighter than &
    e = parse_expr("n & 1 == 0")
    assert e.op == "&"
    assert eval_expr(e, {"n": 2}) == 0
    assert eval_expr(parse_expr("(n & 1) == 0"), {"n": 2}) == 1


@pytest.mark.parametrize("src", [
    "a + b * c", "(a + b) * c", "a - (b - c)", "-a % b", "!(a < b) || c && d",
    "a / b / c", "a / (b / c)", "f(a, b + 1)", "-(-a)",
])
def test_expr_printer_roundtrip(src):
    e = parse_expr(src)
    assert expr_str(parse_expr(expr_str(e))) == expr_str(e)


ops = st.sampled_from(["+", "-", "*", "&", "<", "==", "&&", "||", "/", "%"])


@st.composite
def exprs(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        return draw(st.sampled_from(["a", "b", "0", "1", "7", "-3"]))
    op = draw(ops)
    left = draw(exprs(depth=depth - 1))
    right = draw(exprs(depth=depth - 1))
    if draw(st.booleans()):
        return f"!({left} {op} {right})"
    return f"({left} {op} {right})"


@settings(max_examples=200, deadline=None)
@given(exprs(), st.integers(-128, 127), st.integers(-128, 127))
def test_printed_expr_evaluates_the_same(src, a, b):
    e = parse_expr(src)
    again = parse_expr(expr_str(e))
    env = {"a": a, "b": b}
    assert eval_expr(e, env) == eval_expr(again, env)


@pytest.mark.parametrize("src, err", [
    ("int f(int n) { return g(n); }", UndefinedCallee),
    ("int f(int n) { return m; }", UndefinedVariable),
    ("int f(int n) { return f(n, n); }", ArityMismatch),
    ("int f(int n) { if (n) return 1; }", MissingReturn),
    ("int f(int n) { return 1; } int f(int m) { return 2; }", DuplicateFunction),
    ("int f(int n) { return g(n); } int g(int n) { return f(n); }", MutualRecursionUnsupported),
    ("int f(int n) { assume(n > 0); return n; }", ReservedIdentifier),
])
def test_frontend_errors(src, err):
    with pytest.raises(err):
        typecheck(parse(src))


def test_reserved_prefix_rejected_by_parser():
    with pytest.raises(ParseError, match="reserved"):
        parse("int __rv_x(int n) { return n; }")
    assert parse("int __rv_x(int n) { return n; }", allow_reserved=True)


def test_parse_error_location():
    with pytest.raises(ParseError) as info:
        parse("int f(int n) {\n  return n +;\n}")
    assert info.value.line == 2


def test_recursive_sites(fib):
    assert len(recursive_call_sites(fib.function("f1"))) == 2
    assert len(recursive_call_sites(fib.function("f2"))) == 3
    assert len(recursive_call_sites(fib.function("h2"))) == 5


def test_call_graph_bottom_up():
    u = load("int g(int n) { return n + 1; }\n"
             "int f(int n) { if (n < 1) return 0; return g(f(n - 1)); }")
    cg = call_graph(u)
    assert cg.recursive("f") and not cg.recursive("g")
    order = cg.bottom_up()
    assert order.index("g") < order.index("f")


def test_loops_are_lowered(corpus):
    u = corpus["loops.mrc"]
    assert any(n.startswith("__rv_loop") for n in u.names)
    assert len(set(u.names)) == len(u.names)
    s = u.function("s")
    for n in range(-8, 20):
        assert eval(s, [n], unit=u) == eval(u.function("r"), [n], unit=u)


def test_two_live_outs_give_two_functions(corpus):
    u = corpus["loops.mrc"]
    gen = [n for n in u.names if n.startswith("__rv_loop") and n.endswith(("_a", "_b"))]
    assert len(gen) >= 2


def test_width_wraps():
    u = load("int f(int n) { return n * 64; }")
    assert eval(u.function("f"), [3]) == Value(-64)
    assert eval(u.function("f"), [3], width=16) == Value(192)


def test_division_by_zero_is_zero():
    u = load("int f(int n) { return 7 / n + 7 % n; }")
    assert eval(u.function("f"), [0]) == Value(0)
    assert eval(u.function("f"), [-2]) == Value(-3 + 1)


def test_empty_unit():
    u = parse("")
    assert u.functions == () and u.externs == ()


def test_dangling_operator_reported_at_operator():
    with pytest.raises(ParseError, match="'\\+'") as info:
        parse("int f(int n){return f(n-1)+}")
    assert (info.value.line, info.value.col) == (1, 27)
