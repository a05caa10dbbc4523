import itertools

import pytest
from hypothesis import given, settings, strategies as st

from recveq.lang import load
from recveq.oracle import (DomainSpec, EquivalentOnDomain, FuelLimited, Interpreter,
                           NonTermination, Value, Witness, brute_force_equiv, c_div, c_mod,
                           eval, wrap, zigzag)


def fib_value(n):
    a, b = 0, 1
    for _ in range(max(n, 0)):
        a, b = b, a + b
    return wrap(a, 8)


def test_zigzag_prefix():
    assert [zigzag(k) for k in range(7)] == [0, -1, 1, -2, 2, -3, 3]
    assert sorted(zigzag(k) for k in range(256)) == list(range(-128, 128))


@given(st.integers(-1000, 1000), st.integers(-1000, 1000).filter(bool))
def test_c_division_truncates(a, b):
    q, r = c_div(a, b), c_mod(a, b)
    assert q * b + r == a
    assert abs(r) < abs(b)
    assert r == 0 or (r > 0) == (a > 0)


@given(st.integers(-10**6, 10**6))
def test_wrap_range(x):
    w = wrap(x, 8)
    assert -128 <= w <= 127 and (w - x) % 256 == 0


def test_fibonacci_values(fib):
    for n in range(0, 11):
        assert eval(fib.function("f1"), [n]) == Value(fib_(n))
        assert eval(fib.function("h2"), [n]) == Value(fib_(n))


def fib_(n):
    return fib_value(n)


def test_nontermination_reported(fib):
    r = eval(fib.function("f1"), [40], fuel=256)
    assert isinstance(r, NonTermination)


def test_sum_equivalent_on_full_domain(sums):
    r = brute_force_equiv(sums.function("sum1"), sums.function("sum2"))
    assert isinstance(r, EquivalentOnDomain)
    assert not isinstance(r, FuelLimited)
    assert r.checked == 256


def test_fibonacci_pair_on_small_range(fib):
    r = brute_force_equiv(fib.function("f1"), fib.function("f2"),
                          DomainSpec(ranges=((-8, 12),)))
    # f2 at n=12 needs more than 256 frames, so some inputs are excluded
    assert isinstance(r, EquivalentOnDomain)


def test_first_witness_in_zigzag_order(sums):
    bad = load("int g(int n) { if (n <= 1) return n; return n + g(n - 1) + (n == 5 || n == -9); }")
    r = brute_force_equiv(sums.function("sum1"), bad.function("g"))
    assert r == Witness((5,), 15, 16)


def test_trace_records_frames(fib):
    r, trace = eval(fib.function("f1"), [4], trace=True)
    assert r == Value(3)
    assert trace[0].name == "f1" and trace[0].args == (4,)
    assert len(trace) == 5
    assert max(fr.depth for fr in trace) == 2


def test_uf_and_nondet_hooks():
    u = load("int g(int x);\nint f(int n) { return g(n) + g(n + 1); }")
    i = Interpreter(u, uf=lambda name, args: args[0] * 2)
    assert i.run("f", [3]) == Value(14)


@pytest.mark.parametrize("fuel", [1, 7, 30, 256])
def test_memo_matches_plain_interpretation(corpus, fuel):
    # memoized and plain interpreters must agree on values and on fuel outcomes
    for unit in corpus.values():
        fast = Interpreter(unit)
        slow = Interpreter(unit, memo=False)
        for f in unit.functions:
            xs = itertools.product(range(-3, 14), repeat=f.arity)
            for x in itertools.islice(xs, 120):
                assert fast.run(f.name, x, fuel) == slow.run(f.name, x, fuel), (f.name, x)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(-20, 20), st.integers(1, 300)), min_size=1, max_size=30))
def test_memo_is_order_independent(fib, queries):
    # cached costs must not leak between runs with different fuel
    fast = Interpreter(fib)
    slow = Interpreter(fib, memo=False)
    for n, fuel in queries:
        for name in ("f1", "f2", "h2"):
            assert fast.run(name, [n], fuel) == slow.run(name, [n], fuel)
