"""Acceptance criteria 1 to 9; the summary prints one pass/fail line per criterion."""
import random
import time

import numpy as np
import pytest

from mutants import all_mutants
from recveq.backend import model_satisfies, recording, solve
from recveq.cases import CASES, corpus_text, corpus_unit
from recveq.config import DEFAULT
from recveq.errors import BudgetExceeded
from recveq.lang import call_graph, load, parse, recursive_call_sites, typecheck
from recveq.oracle import (DomainSpec, EquivalentOnDomain, Interpreter, Value, Witness,
                           brute_force_equiv)
from recveq.pathex import domain_inputs, natural_base_case_precondition
from recveq.prover import (Equivalent, Inconclusive, NotEquivalent, NotProven, PairMapping,
                           base_case_info, prove_part_eq_basic, prove_programs)
from recveq.sync import NotFound, SyncFound, find_sync_unrolling
from recveq.transforms import LEAF, Expand, SyncUnrolling, apply_unrolling, expand_all, normalize

criterion = pytest.mark.criterion
UNROLL_ONCE = SyncUnrolling(Expand((expand_all(2), LEAF)), LEAF)


@pytest.fixture(scope="module")
def runs():
    """Every corpus pair through the whole pipeline, with the solver queries it issued."""
    out = {}
    with recording() as log:
        for case in CASES:
            unit = corpus_unit(case.source)
            t = time.monotonic()
            rep = prove_programs(unit, unit, PairMapping((case.pair,)))
            out[case.pair] = (rep.pairs[0].outcome, time.monotonic() - t)
    out["queries"] = list(log)
    return out


def sweep(unit, a, b):
    return brute_force_equiv(unit.function(a), unit.function(b), DomainSpec(fuel=256), unit, unit)


def extensional(pred, fn):
    xs = domain_inputs(pred.params, 8)
    return (pred.mask(8) == np.array([fn(*x) for x in xs])).all()


@criterion(1, "sum1/sum2 Equivalent via basic rule, oracle agrees")
def test_criterion_1(runs):
    out, seconds = runs[("sum1", "sum2")]
    assert out.verdict == Equivalent()
    assert out.strategy == "part-eq" and seconds < 5
    r = sweep(corpus_unit("sum.mrc"), "sum1", "sum2")
    assert isinstance(r, EquivalentOnDomain) and not r.fuel_limited


@criterion(2, "f1/f2: basic fails, full rule finds the unroll-once su")
def test_criterion_2(runs):
    fib = corpus_unit("fib.mrc")
    f1, f2 = fib.function("f1"), fib.function("f2")
    basic = prove_part_eq_basic(f1, f2)
    assert isinstance(basic.verdict, NotProven) and basic.verdict.reason == "PremiseFailed"

    out, seconds = runs[("f1", "f2")]
    assert out.verdict == Equivalent() and seconds < 60
    found = [p.su for p in out.path_pairs if p.su is not None]
    assert found and all(su == UNROLL_ONCE for su in found)

    rho1 = natural_base_case_precondition(f1)
    sync = find_sync_unrolling(f1, f2, rho1, natural_base_case_precondition(f2))
    assert isinstance(sync, SyncFound) and sync.su == UNROLL_ONCE
    (n,) = sync.witness.input
    assert sync.witness.leaf_set(1) == sync.witness.leaf_set(2) == {(n - 2,), (n - 3,)}

    info = base_case_info(f1, f2, UNROLL_ONCE)
    assert extensional(info.rho1, lambda n: n < 3)
    assert extensional(info.bcpc1, lambda n: n <= 3)


@criterion(3, "h1/h2 Equivalent with an infeasible path pair pruned")
def test_criterion_3(runs):
    out, seconds = runs[("h1", "h2")]
    assert out.verdict == Equivalent() and seconds < 120
    assert any(not p.feasible for p in out.path_pairs)


@criterion(4, "m1/m2 NotProven at the step, oracle says equivalent")
def test_criterion_4(runs):
    out, _ = runs[("m1", "m2")]
    assert out.verdict == NotProven("StepFailed", out.verdict.detail)
    assert any(p.step.startswith("Counterexample") for p in out.path_pairs)
    assert isinstance(sweep(corpus_unit("switch.mrc"), "m1", "m2"), EquivalentOnDomain)


@criterion(5, "t1/t2 has no sync unrolling, oracle says equivalent")
def test_criterion_5(runs):
    out, _ = runs[("t1", "t2")]
    assert isinstance(out.verdict, NotProven)
    assert out.verdict.reason == "SyncUnrollingNotFound"
    u = corpus_unit("redundant.mrc")
    t1, t2 = u.function("t1"), u.function("t2")
    r = find_sync_unrolling(t1, t2, natural_base_case_precondition(t1),
                            natural_base_case_precondition(t2))
    assert isinstance(r, NotFound) and r.uw <= 6
    assert isinstance(sweep(u, "t1", "t2"), EquivalentOnDomain)


@criterion(6, "Pascal base case Inconclusive, verdict Inconclusive")
def test_criterion_6(runs):
    out, _ = runs[("p1", "p2")]
    assert isinstance(out.verdict, Inconclusive)
    assert any(p.base.startswith("Inconclusive") for p in out.path_pairs)


# -- soundness battery -------------------------------------------------------------------

CHEAP = DEFAULT.with_(uw_max=3, sync_budget=5.0, solver_timeout=2.0, sweep_budget=2.0,
                      depth_bound=10)


def mutant_pool():
    pool = []
    for case in CASES:
        unit = corpus_unit(case.source)
        for name in case.pair:
            for site, m in all_mutants(unit, name):
                pool.append((case.pair, name, site, m))
    return pool


@criterion(7, "no unsound verdict over single-edit mutants")
def test_criterion_7():
    pool = mutant_pool()
    sample = random.Random(7).sample(pool, 120)
    violations, refuted, disagreeing = [], 0, 0
    for pair, name, site, m in sample:
        a, b = pair
        verdict = prove_programs(m, m, PairMapping((pair,)), CHEAP).pairs[0].outcome.verdict
        oracle = sweep(m, a, b)
        if isinstance(oracle, Witness):
            disagreeing += 1
            if isinstance(verdict, Equivalent):
                violations.append((name, site, "Equivalent despite", oracle))
        if isinstance(verdict, NotEquivalent):
            refuted += 1
            i = Interpreter(m)
            r1, r2 = i.run(a, verdict.input), i.run(b, verdict.input)
            if not (r1 == Value(verdict.v1) and r2 == Value(verdict.v2) and r1 != r2):
                violations.append((name, site, "witness does not replay", verdict))
    print(f"\n{len(sample)} mutants of {len(pool)}: {disagreeing} differ, {refuted} refuted")
    assert len(sample) >= 100
    assert violations == []


# -- backend differential ------------------------------------------------------------------

@criterion(8, "enumerate and SAT core agree; SAT models replay")
def test_criterion_8(runs):
    small = [q for q in runs["queries"] if q.free_bits <= 24]
    assert small
    cfg = DEFAULT.with_(solver_timeout=120.0, conflict_limit=2_000_000)
    violations = []
    for q in small:
        results = {}
        for engine in ("enumerate", "satcore"):
            try:
                results[engine] = solve(q.formula, engine=engine, config=cfg)
            except BudgetExceeded as exc:
                violations.append((q.formula.label, engine, str(exc)))
        if len(results) < 2:
            continue
        if results["enumerate"].sat != results["satcore"].sat:
            violations.append((q.formula.label, "disagree"))
        for engine, r in results.items():
            if not r.sat:
                continue
            ok = q.replay(r.model) if q.replay else model_satisfies(q.formula, r.model)
            if not ok:
                violations.append((q.formula.label, engine, "model does not replay"))
    print(f"\n{len(small)} of {len(runs['queries'])} queries have at most 24 free bits")
    assert violations == []


# -- transform semantics -------------------------------------------------------------------

def random_tree(rng, c, depth):
    if depth == 0 or rng.random() < 0.4:
        return LEAF
    return Expand(tuple(random_tree(rng, c, depth - 1) for _ in range(c)))


def corpus_functions():
    for name in ("sum.mrc", "fib.mrc", "switch.mrc", "redundant.mrc", "pascal.mrc", "loops.mrc"):
        unit = corpus_unit(name)
        for f in unit.functions:
            yield unit, f


def sweep_entries(unit, f):
    """Where to sweep ``f`` from: itself, or its callers when its own domain is too wide."""
    if f.arity <= 2:
        return [f]
    graph = call_graph(unit)

    def reaches(g):
        return f.name in graph.callees(g.name) or any(
            reaches(unit.function(h)) for h in graph.callees(g.name) if h != g.name)

    return [g for g in unit.functions if g.arity <= 2 and reaches(g)]


@criterion(9, "unrolling and loop lowering preserve behavior")
def test_criterion_9():
    rng = random.Random(9)
    violations = []
    checked = 0
    for unit, f in corpus_functions():
        c = len(recursive_call_sites(f))
        trees = {normalize(random_tree(rng, c, 2)) for _ in range(50)} if c else {LEAF}
        rest = [g for g in unit.functions if g.name != f.name]
        entries = sweep_entries(unit, f)
        assert entries, f.name
        for entry in entries:
            xs = [tuple(int(v) for v in x) for x in domain_inputs(entry.params, 8)]
            plain = Interpreter(unit)
            expected = [plain.run(entry.name, x) for x in xs]
            for tree in trees:
                i = Interpreter(apply_unrolling(f, tree) + rest)
                checked += 1
                if [i.run(entry.name, x) for x in xs] != expected:
                    violations.append((f.name, entry.name, tree))

    looped = typecheck(parse(corpus_text("loops.mrc")))
    lowered = load(corpus_text("loops.mrc"))
    # one generated function per live-out variable replays the loop, so the
    # lowered form may need that many times the fuel
    scale = 1 + sum(n.startswith("__rv_loop") for n in lowered.names)
    a, b = Interpreter(looped), Interpreter(lowered)
    for f in looped.functions:
        for x in domain_inputs(f.params, 8):
            x = tuple(int(v) for v in x)
            ra, rb, rb_big = a.run(f.name, x), b.run(f.name, x), b.run(f.name, x, 256 * scale)
            if isinstance(ra, Value) and rb_big != ra:
                violations.append((f.name, x, ra, rb_big))
            if isinstance(rb, Value) and ra != rb:
                violations.append((f.name, x, ra, rb))
    print(f"\n{checked} (function, tree) sweeps")
    assert violations == []
