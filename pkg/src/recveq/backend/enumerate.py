"""Exhaustive vectorized model search over small variable spaces."""
from __future__ import annotations

from typing import Dict, Optional, Sequence

import numpy as np

from .terms import BOOL, Term, evaluate, size


def zigzag_np(k):
    return (k >> 1) ^ -(k & 1)


def var_bits(t: Term) -> int:
    return 1 if t.width == BOOL else t.width


def enumerate_first(constraints: Sequence[Term], variables: Sequence[Term],
                    chunk: Optional[int] = None,
                    flipped=frozenset()) -> Optional[Dict[str, object]]:
    """First satisfying assignment in lexicographic order over ``variables``.

    The first variable is the most significant digit.  Within a
    bit-vector digit values run 0, -1, 1, -2, ... so small magnitudes come
    first; booleans run false, true (true, false for names in ``flipped``).
    """
    sizes = [1 << var_bits(v) for v in variables]
    total = 1
    for s in sizes:
        total *= s
    strides = []
    acc = 1
    for s in reversed(sizes):
        strides.append(acc)
        acc *= s
    strides.reverse()
    if chunk is None:
        nodes = max(1, size(constraints))
        chunk = int(min(1 << 20, max(1 << 12, (1 << 24) // nodes)))
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        env = {}
        for v, s, st in zip(variables, sizes, strides):
            digit = (idx // st) % s
            if v.width != BOOL:
                env[v.val] = zigzag_np(digit)
            else:
                env[v.val] = digit.astype(bool) ^ (v.val in flipped)
        ok = np.ones(len(idx), dtype=bool)
        for value in evaluate(list(constraints), env):
            ok &= value
            if not ok.any():
                break
        hits = np.flatnonzero(ok)
        if len(hits):
            i = hits[0]
            return {v.val: (bool(env[v.val][i]) if v.width == BOOL else int(env[v.val][i]))
                    for v in variables}
    return None
