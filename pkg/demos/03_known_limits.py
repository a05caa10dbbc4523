"""Equivalent pairs the method cannot prove, and why.

m1/m2 thread a flag that never affects the result. A sync unrolling
exists on the n argument, but the step proof sees two different flag
values reach the uninterpreted calls and cannot relate them.

t2 makes all three calls and only uses some of them, so no unrolling of
t1 produces the same leaf multiset.

In both cases the brute-force oracle shows the functions agree on every
8-bit input that terminates within fuel. NotProven reports a limit of the
method, not a bug.
"""
from recveq import Config, load, prove_full_part_eq
from recveq.cases import corpus_text
from recveq.oracle import brute_force_equiv

quick = Config(uw_max=3, sync_budget=10.0)

for source, a, b in (("switch.mrc", "m1", "m2"), ("redundant.mrc", "t1", "t2")):
    unit = load(corpus_text(source))
    f1, f2 = unit.function(a), unit.function(b)
    out = prove_full_part_eq(f1, f2, quick)
    print(f"{a}/{b}: {out.verdict}")
    for task, result in out.evidence:
        if task.split()[0] in ("sync", "base", "step"):
            print(f"  {task}: {result}")
    r = brute_force_equiv(f1, f2)
    print(f"  oracle: {type(r).__name__}, {r.checked} inputs agree,"
          f" {len(r.fuel_limited)} ran out of fuel")
