"""Two shapes of the same recursion prove equivalent in one query.

sum1 and sum2 make the same recursive call, sum(n - 1), on every input.
Replacing that call on both sides with one uninterpreted function g is
enough: if g returns the same value to both, the results agree.
"""
from recveq import load, prove_part_eq_basic
from recveq.cases import corpus_text
from recveq.oracle import brute_force_equiv

unit = load(corpus_text("sum.mrc"))
sum1, sum2 = unit.function("sum1"), unit.function("sum2")

out = prove_part_eq_basic(sum1, sum2)
print("verdict:", out.verdict)
for task, result in out.evidence:
    print(f"  {task}: {result}")

# the proof covers every 8-bit input; the oracle agrees input by input
print("oracle:", brute_force_equiv(sum1, sum2))
