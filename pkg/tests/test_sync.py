from collections import Counter

import pytest

from recveq.config import DEFAULT
from recveq.errors import InconsistentWitness
from recveq.pathex import natural_base_case_precondition
from recveq.sync import (LeafRecord, NotFound, SyncFound, SyncWitness, build_sync_program,
                         find_sync_unrolling, generate_sync_unrolling, prune_witness)
from recveq.transforms import LEAF, Expand, SyncUnrolling, expand_all


def search(unit, a, b, config=DEFAULT):
    f1, f2 = unit.function(a), unit.function(b)
    return find_sync_unrolling(f1, f2, natural_base_case_precondition(f1),
                               natural_base_case_precondition(f2), config)


def test_skip_ahead_sync_unrolling(fib):
    r = search(fib, "f1", "f2")
    assert isinstance(r, SyncFound)
    assert r.su == SyncUnrolling(Expand((expand_all(2), LEAF)), LEAF)
    (n,) = r.witness.input
    assert r.witness.leaf_set(1) == r.witness.leaf_set(2) == {(n - 2,), (n - 3,)}
    assert r.witness.leaf_multiset(1) == r.witness.leaf_multiset(2)


def test_found_su_is_json_stable(fib):
    r = search(fib, "f1", "f2")
    back = SyncUnrolling.from_json(r.su.to_json(2, 3))
    assert back == r.su


def test_uw_max_zero(fib):
    r = search(fib, "f1", "f2", DEFAULT.with_(uw_max=0))
    assert isinstance(r, NotFound) and r.reason == "BudgetExhausted"


def test_redundant_calls_have_no_sync(corpus):
    r = search(corpus["redundant.mrc"], "t1", "t2", DEFAULT.with_(uw_max=2))
    assert isinstance(r, NotFound)
    assert r.reason == "ProvedImpossibleUpTo" and r.uw == 2


def test_recording_program_shape(fib):
    f1, f2 = fib.function("f1"), fib.function("f2")
    prog = build_sync_program(f1, f2, natural_base_case_precondition(f1),
                              natural_base_case_precondition(f2))
    assert prog.arity == (2, 3)
    names = set(prog.unit.names)
    assert "__rv_main" in names


def rec(path, args):
    return LeafRecord(len(path), path[-1], args, path)


def test_tree_from_witness():
    w = SyncWitness((6,),
                    ((rec((0, 0), (4,)), rec((0, 1), (3,)), rec((1,), (4,))),
                     (rec((0,), (4,)), rec((1,), (4,)), rec((2,), (3,)))),
                    ({(): (6,), (0,): (5,)}, {(): (6,)}))
    su = generate_sync_unrolling(w, 2, 3)
    assert su == SyncUnrolling(Expand((expand_all(2), LEAF)), LEAF)


@pytest.mark.parametrize("records, expanded", [
    ((rec((0, 0), (1,)),), {(): (3,)}),            # parent frame (0,) never ran
    ((rec((0,), (1,)), rec((0,), (2,))), {(): (3,)}),  # two records at one site
    ((rec((0,), (1,)),), {(): (3,), (0,): (2,)}),  # recorded and ran
])
def test_inconsistent_witness(records, expanded):
    w = SyncWitness((3,), (records, ()), (expanded, {}))
    with pytest.raises(InconsistentWitness):
        generate_sync_unrolling(w, 2, 2)


def test_prune_keeps_multisets_equal():
    # side 1 expanded (0,) although recording it directly would already match
    w = SyncWitness((5,),
                    ((rec((0, 0), (3,)), rec((0, 1), (2,)), rec((1,), (3,))),
                     (rec((0,), (4,)), rec((1,), (3,)))),
                    ({(): (5,), (0,): (4,)}, {(): (5,)}))
    p = prune_witness(w)
    assert Counter(p.leaf_multiset(1)) == Counter(p.leaf_multiset(2))
    assert generate_sync_unrolling(p, 2, 2) == SyncUnrolling(LEAF, LEAF)
