"""Tseitin bit-blasting of UF-free terms into CNF for the SAT core."""
from __future__ import annotations

from typing import Dict, List

from ..errors import WidthOverflowUnsupported
from .sat import SatSolver
from .terms import BOOL, Term, topo


class BitBlaster:
    """Translates terms into clauses on a ``SatSolver``.

    Gates are structurally hashed and constant-propagated, so blasting
    the same subterm twice costs nothing.  Bit-vectors are lists of
    literals, least significant bit first.
    """

    def __init__(self, solver: SatSolver = None, keep_clauses: bool = False):
        self.s = solver or SatSolver()
        self.T = self.s.new_var()
        self.F = -self.T
        self.s.add_clause([self.T])
        self.cache: Dict[int, object] = {}
        self.gates: Dict[tuple, int] = {}
        self.vars: Dict[str, object] = {}
        self.clauses: List[List[int]] = [[self.T]] if keep_clauses else None

    def _clause(self, lits):
        if self.clauses is not None:
            self.clauses.append(list(lits))
        self.s.add_clause(lits)

    # -- gates ----------------------------------------------------------------------

    def AND(self, a: int, b: int) -> int:
        T, F = self.T, self.F
        if a == F or b == F or a == -b:
            return F
        if a == T:
            return b
        if b == T or a == b:
            return a
        if a > b:
            a, b = b, a
        key = ("and", a, b)
        g = self.gates.get(key)
        if g is None:
            g = self.s.new_var()
            self._clause([-g, a])
            self._clause([-g, b])
            self._clause([g, -a, -b])
            self.gates[key] = g
        return g

    def OR(self, a: int, b: int) -> int:
        return -self.AND(-a, -b)

    def XOR(self, a: int, b: int) -> int:
        T, F = self.T, self.F
        if a == F:
            return b
        if b == F:
            return a
        if a == T:
            return -b
        if b == T:
            return -a
        if a == b:
            return F
        if a == -b:
            return T
        # normalize polarity so x^y, -x^y share one gate
        sign = 1
        if a < 0:
            a, sign = -a, -sign
        if b < 0:
            b, sign = -b, -sign
        if a > b:
            a, b = b, a
        key = ("xor", a, b)
        g = self.gates.get(key)
        if g is None:
            g = self.s.new_var()
            self._clause([-g, a, b])
            self._clause([-g, -a, -b])
            self._clause([g, -a, b])
            self._clause([g, a, -b])
            self.gates[key] = g
        return g * sign

    def MUX(self, s: int, t: int, e: int) -> int:
        T, F = self.T, self.F
        if s == T or t == e:
            return t
        if s == F:
            return e
        if s < 0:
            s, t, e = -s, e, t
        if t == T:
            return self.OR(s, e)
        if t == F:
            return self.AND(-s, e)
        if e == T:
            return self.OR(-s, t)
        if e == F:
            return self.AND(s, t)
        key = ("mux", s, t, e)
        g = self.gates.get(key)
        if g is None:
            g = self.s.new_var()
            self._clause([-s, -t, g])
            self._clause([-s, t, -g])
            self._clause([s, -e, g])
            self._clause([s, e, -g])
            # redundant but helps propagation
            self._clause([-t, -e, g])
            self._clause([t, e, -g])
            self.gates[key] = g
        return g

    def all_(self, lits) -> int:
        out = self.T
        for x in lits:
            out = self.AND(out, x)
        return out

    def any_(self, lits) -> int:
        out = self.F
        for x in lits:
            out = self.OR(out, x)
        return out

    # -- word-level circuits ----------------------------------------------------------

    def const_bits(self, value: int, width: int) -> List[int]:
        return [self.T if (value >> i) & 1 else self.F for i in range(width)]

    def adder(self, a, b, cin=None):
        cin = self.F if cin is None else cin
        out = []
        c = cin
        for x, y in zip(a, b):
            s = self.XOR(x, y)
            out.append(self.XOR(s, c))
            c = self.OR(self.AND(x, y), self.AND(s, c))
        return out, c

    def negate(self, a):
        out, _ = self.adder([-x for x in a], self.const_bits(0, len(a)), self.T)
        return out

    def multiplier(self, a, b):
        W = len(a)
        acc = self.const_bits(0, W)
        for i in range(W):
            if b[i] == self.F:
                continue
            partial = [self.F] * i + [self.AND(x, b[i]) for x in a[:W - i]]
            acc, _ = self.adder(acc, partial)
        return acc

    def ult(self, a, b) -> int:
        lt = self.F
        for x, y in zip(a, b):
            # from LSB upwards: a higher differing bit overrides lower ones
            lt = self.MUX(self.XOR(x, y), y, lt)
        return lt

    def equal(self, a, b) -> int:
        return self.all_(-self.XOR(x, y) for x, y in zip(a, b))

    def udivrem(self, a, b):
        W = len(a)
        q = [self.F] * W
        rem = [self.F] * W
        for i in reversed(range(W)):
            # shift in the next dividend bit; keep one overflow bit
            wide = [a[i]] + rem
            wide_b = b + [self.F]
            diff, carry = self.adder(wide, [-x for x in wide_b], self.T)
            ge = carry  # no borrow means wide >= b
            q[i] = ge
            rem = [self.MUX(ge, d, r) for d, r in zip(diff[:W], wide[:W])]
        return q, rem

    def sdivrem(self, a, b):
        W = len(a)
        sa, sb = a[-1], b[-1]
        abs_a = [self.MUX(sa, x, y) for x, y in zip(self.negate(a), a)]
        abs_b = [self.MUX(sb, x, y) for x, y in zip(self.negate(b), b)]
        q, r = self.udivrem(abs_a, abs_b)
        qs = self.XOR(sa, sb)
        q = [self.MUX(qs, x, y) for x, y in zip(self.negate(q), q)]
        r = [self.MUX(sa, x, y) for x, y in zip(self.negate(r), r)]
        bz = -self.any_(b)
        zero = self.const_bits(0, W)
        q = [self.MUX(bz, z, x) for z, x in zip(zero, q)]
        r = [self.MUX(bz, z, x) for z, x in zip(zero, r)]
        return q, r

    # -- terms --------------------------------------------------------------------------

    def var_bits(self, name: str, width: int):
        v = self.vars.get(name)
        if v is None:
            if width == BOOL:
                v = self.s.new_var()
            else:
                v = [self.s.new_var() for _ in range(width)]
            self.vars[name] = v
        return v

    def blast(self, root: Term):
        for t in topo([root]):
            if t.id in self.cache:
                continue
            self.cache[t.id] = self._blast_one(t)
        return self.cache[root.id]

    def _blast_one(self, t: Term):
        op, W = t.op, t.width
        if W > 64:
            raise WidthOverflowUnsupported(op, f"width {W}")
        if op == "const":
            return self.const_bits(t.val, W)
        if op == "bconst":
            return self.T if t.val else self.F
        if op == "var":
            return self.var_bits(t.val, W)
        if op == "uf":
            raise ValueError("UF applications must be eliminated before bit-blasting")
        a = [self.cache[x.id] for x in t.args]
        if op == "add":
            return self.adder(a[0], a[1])[0]
        if op == "neg":
            return self.negate(a[0])
        if op == "mul":
            return self.multiplier(a[0], a[1])
        if op == "sdiv":
            return self.sdivrem(a[0], a[1])[0]
        if op == "srem":
            return self.sdivrem(a[0], a[1])[1]
        if op == "bvand":
            return [self.AND(x, y) for x, y in zip(a[0], a[1])]
        if op == "ite":
            if t.width == BOOL:
                return self.MUX(a[0], a[1], a[2])
            return [self.MUX(a[0], x, y) for x, y in zip(a[1], a[2])]
        if op == "not":
            return -a[0]
        if op == "and":
            return self.AND(a[0], a[1])
        if op == "or":
            return self.OR(a[0], a[1])
        if op == "eq":
            if t.args[0].width == BOOL:
                return -self.XOR(a[0], a[1])
            return self.equal(a[0], a[1])
        if op in ("slt", "sle"):
            x, y = list(a[0]), list(a[1])
            # flipping the sign bits turns signed order into unsigned order
            x[-1], y[-1] = -x[-1], -y[-1]
            if op == "slt":
                return self.ult(x, y)
            return -self.ult(y, x)
        raise ValueError(op)

    def assert_(self, t: Term) -> None:
        self._clause([self.blast(t)])

    def dimacs(self) -> str:
        clauses = self.clauses or []
        lines = [f"p cnf {self.s.nvars} {len(clauses)}"]
        lines += [" ".join(map(str, c)) + " 0" for c in clauses]
        return "\n".join(lines) + "\n"
