"""Out-of-sync Fibonacci variants need an unrolling before they line up.

f1 calls f1(n-1) and f1(n-2); f2 calls f2(n-2) twice and f2(n-3). The
shared-UF check fails because the calls are unrelated. Unrolling f1's
first call once gives leaves {n-2, n-3, n-2} on the f1 side, the same
multiset f2 produces. After that, base cases and the inductive step can
be proved separately.
"""
from recveq import find_sync_unrolling, load, natural_base_case_precondition, prove_part_eq_basic
from recveq.cases import corpus_text
from recveq.prover import base_case_info, prove_full_part_eq
from recveq.transforms import render_tree

unit = load(corpus_text("fib.mrc"))
f1, f2 = unit.function("f1"), unit.function("f2")

basic = prove_part_eq_basic(f1, f2)
print("shared-UF check:", basic.verdict, "diagnostic input", basic.witness)

rho1 = natural_base_case_precondition(f1)
rho2 = natural_base_case_precondition(f2)
print("no recursion when:", rho1, "/", rho2)

sync = find_sync_unrolling(f1, f2, rho1, rho2)
print(f"sync unrolling found at unwinding {sync.uw}, witness input {sync.witness.input}")
print(render_tree(sync.su.side1, "f1", 2))
print(render_tree(sync.su.side2, "f2", 3))
print("leaves:", sorted(sync.witness.leaf_multiset(1).elements()))

info = base_case_info(f1, f2, sync.su)
n_values = [n for n in range(-4, 8) if info.bcpc1.holds([n], 8)]
print("unrolled f1 reaches a base case for n in", n_values, "within that window")

out = prove_full_part_eq(f1, f2)
print("full rule:", out.verdict)
for p in out.path_pairs:
    if not p.feasible:
        state = "pruned, no input satisfies both"
    elif p.su is None:
        state = "no recursion on either side, covered by the base-case disjuncts"
    else:
        state = f"su={p.su} base={p.base} step={p.step}"
    print(f"  [{p.index}] {p.pp1}  x  {p.pp2}: {state}")
