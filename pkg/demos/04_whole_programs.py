"""Whole programs: callees first, proven pairs become one shared function.

Both programs define sum and a main that calls it. Once sum/sum is
proven, both mains call the same uninterpreted function in its place,
so main/main only has to show that the surrounding code agrees.
A wrong callee is refuted by a concrete input, and its callers are then
left unproven instead of being trusted.
"""
from recveq import PairMapping, load, prove_programs

TEMPLATE = """
int sum(int n) {{
    if (n <= 0) return 0;
    return {step};
}}
int main(int n) {{
    if (n < 0) return 0;
    return sum(n) + sum(n - 1);
}}
"""

left = load(TEMPLATE.format(step="n + sum(n - 1)"))
right = load(TEMPLATE.format(step="sum(n - 1) + n"))
wrong = load(TEMPLATE.format(step="sum(n - 1) + n + (n == 3)"))
mapping = PairMapping.parse(["main:main", "sum:sum"])

print(prove_programs(left, right, mapping).table())
print()
print(prove_programs(left, wrong, mapping).table())
