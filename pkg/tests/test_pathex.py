import json

import numpy as np
import pytest

from recveq.backend import terms as T
from recveq.cases import corpus_text
from recveq.config import DEFAULT
from recveq.lang import load, parse_expr
from recveq.oracle import Interpreter, Value, eval_expr
from recveq.pathex import (Inconclusive, PathPredicate, Proven, Refuted, base_case_precondition,
                           domain_inputs, get_all_paths, natural_base_case_precondition,
                           paths_json, rename, symexec_equiv)
from recveq.transforms import (LEAF, UF, Expand, RetZero, apply_unrolling, expand_all,
                               instrument_bc_flag, substitute_calls, with_stub)

CHEAP = ["sum.mrc", "fib.mrc", "switch.mrc", "redundant.mrc", "pascal.mrc"]


def recursive_functions(corpus):
    for name in CHEAP:
        u = corpus[name]
        for f in u.functions:
            yield u, f


def top_frame_calls(f, x):
    """How many recursive calls the top frame of ``f`` makes on ``x``."""
    g = substitute_calls(f, [f.name], UF("__rv_probe"))
    count = []
    i = Interpreter(with_stub([g], UF("__rv_probe"), f.arity),
                    uf=lambda name, args: count.append(args) or 0)
    i.run(f.name, x)
    return len(count)


def sweep(f, step=1):
    xs = domain_inputs(f.params, 8)
    return xs[::step]


def test_partition_property(corpus):
    for u, f in recursive_functions(corpus):
        paths = get_all_paths(f, unit=u)
        masks = np.stack([p.mask(8) for p in paths])
        assert (masks.sum(axis=0) == 1).all(), f.name


def test_recursive_tags_match_interpreter(corpus):
    for u, f in recursive_functions(corpus):
        paths = get_all_paths(f, unit=u)
        for x in sweep(f, step=1 if f.arity == 1 else 97):
            (p,) = [p for p in paths if p.holds(x, 8)]
            assert p.recursive == (top_frame_calls(f, tuple(x)) > 0), (f.name, x)


def test_h2_paths(fib):
    paths = get_all_paths(fib.function("h2"))
    assert len(paths) == 4
    assert [p.recursive for p in paths].count(True) == 2
    evens = [p for p in paths if p.recursive and p.holds([4], 8)]
    assert len(evens) == 1 and not evens[0].holds([5], 8)


def test_f1_paths(fib):
    paths = get_all_paths(fib.function("f1"))
    shapes = sorted(tuple(int(p.holds([n], 8)) for n in (0, 1, 2, 3)) for p in paths)
    assert shapes == [(0, 0, 0, 1), (0, 1, 1, 0), (1, 0, 0, 0)]


def test_constant_function_single_path():
    (p,) = get_all_paths(load("int k(int n) { return 4; }").function("k"))
    assert p.mask(8).all() and not p.recursive


def extensionally(p, expr, params):
    xs = domain_inputs(params, 8)
    want = np.array([bool(eval_expr(expr, dict(zip(params, x)))) for x in xs])
    return (p.mask(8) == want).all()


def test_rho_examples(fib, sums):
    assert extensionally(natural_base_case_precondition(fib.function("f1")),
                         parse_expr("n < 3"), ["n"])
    assert extensionally(natural_base_case_precondition(sums.function("sum1")),
                         parse_expr("n <= 1"), ["n"])
    always = load("int g(int n) { return g(n - 1); }").function("g")
    assert not natural_base_case_precondition(always).mask(8).any()


def test_rho_characterization(corpus):
    for u, f in recursive_functions(corpus):
        rho = natural_base_case_precondition(f, unit=u)
        for x in sweep(f, step=1 if f.arity == 1 else 89):
            assert rho.holds(x, 8) == (top_frame_calls(f, tuple(x)) == 0), (f.name, x)


def bcpc_of(f, tree, rho):
    inst = instrument_bc_flag(apply_unrolling(f, tree), rho.expr)
    return inst, base_case_precondition(inst)


def test_bcpc_of_unroll_once(fib):
    f1 = fib.function("f1")
    rho = natural_base_case_precondition(f1)
    _, bcpc = bcpc_of(f1, Expand((expand_all(2), LEAF)), rho)
    assert extensionally(bcpc, parse_expr("n <= 3"), ["n"])
    _, zero = bcpc_of(f1, LEAF, rho)
    assert (zero.mask(8) == rho.mask(8)).all()
    _, top = bcpc_of(f1, LEAF, PathPredicate(T.TRUE, ("n",)))
    assert top.mask(8).all()


@pytest.mark.parametrize("name, tree", [
    ("f1", Expand((expand_all(2), LEAF))),
    ("f1", Expand((expand_all(2), expand_all(2)))),
    ("f2", Expand((LEAF, expand_all(3), LEAF))),
    ("h2", Expand((expand_all(5), LEAF, LEAF, LEAF, expand_all(5)))),
])
def test_bcpc_characterization(fib, name, tree):
    f = fib.function(name)
    rho = natural_base_case_precondition(f)
    inst, bcpc = bcpc_of(f, tree, rho)
    clones = [substitute_calls(g, {inst.entry}, RetZero()) for g in inst.functions]
    i = Interpreter(with_stub(clones + [inst.main], RetZero(), 1))
    for (n,) in domain_inputs(("n",), 8):
        flagged = i.run(inst.main.name, [n]) == Value(0)
        assert bcpc.holds([n], 8) == flagged, n


def test_rename_positional():
    p = PathPredicate(T.slt(T.var("a", 8), T.var("b", 8)), ("a", "b"))
    q = rename(p, ("n", "m"))
    assert q.holds([1, 2], 8) and not q.holds([2, 1], 8)
    assert str(q) == "n < m"


TASK = """
{fib}
int main(int n) {{
    assume({pre});
    assert(f1(n) == f2(n));
    return 0;
}}
"""


def task(fib_text, pre):
    return load(TASK.format(fib=fib_text, pre=pre), allow_reserved=True)


@pytest.fixture(scope="module")
def fib_text():
    return corpus_text("fib.mrc")


def test_symexec_proves_base_region(fib_text):
    r = symexec_equiv(task(fib_text, "n <= 3"), "main", DEFAULT, depth_bound=8)
    assert isinstance(r, Proven)


def test_symexec_refutes_return_two_mutant(fib_text):
    bad = fib_text.replace("if (n <= 2) return 1;\n    return f2", "if (n <= 2) return 2;\n    return f2")
    assert bad != fib_text
    r = symexec_equiv(task(bad, "n <= 3"), "main", DEFAULT, depth_bound=8)
    assert isinstance(r, Refuted) and r.input in ((1,), (2,))


def test_symexec_depth_bound_is_inconclusive(fib_text):
    r = symexec_equiv(task(fib_text, "n <= 40"), "main", DEFAULT, depth_bound=4)
    assert isinstance(r, Inconclusive)


def test_paths_json(fib):
    f = fib.function("h2")
    data = json.loads(paths_json(f, get_all_paths(f)))
    assert data["function"] == "h2" and len(data["paths"]) == 4
