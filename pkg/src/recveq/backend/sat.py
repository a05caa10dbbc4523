"""A small conflict-driven clause-learning SAT solver.

Two watched literals, first-UIP learning with self-subsumption
minimization, VSIDS with phase saving, Luby restarts, LBD-based clause
database reduction and solving under assumptions.  Literals use the
DIMACS convention at the API (``v`` / ``-v`` for ``v >= 1``).
"""
from __future__ import annotations

import heapq
import time
from typing import Iterable, List, Optional, Sequence


def luby(i: int) -> int:
    """The i-th element (1-based) of the Luby sequence 1,1,2,1,1,2,4,..."""
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while True:
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1


class SatSolver:
    def __init__(self):
        self.nvars = 0
        # internal literal encoding: 2*v for v, 2*v+1 for -v
        self.watches: List[List[list]] = [[], []]
        self.value: List[int] = [0]  # per var: 1 true, -1 false, 0 unassigned
        self.level: List[int] = [0]
        self.reason: List[Optional[list]] = [None]
        self.activity: List[float] = [0.0]
        self.phase: List[bool] = [False]
        self.trail: List[int] = []
        self.trail_lim: List[int] = []
        self.qhead = 0
        self.heap: list = []
        self.var_inc = 1.0
        self.learnts: List[list] = []
        self.ok = True
        self.conflicts = 0
        self.decisions = 0
        self.propagations = 0
        self.model: List[bool] = []
        self.n_clauses = 0

    # -- construction -------------------------------------------------------------

    def new_var(self) -> int:
        self.nvars += 1
        self.watches.append([])
        self.watches.append([])
        self.value.append(0)
        self.level.append(0)
        self.reason.append(None)
        self.activity.append(0.0)
        self.phase.append(False)
        heapq.heappush(self.heap, (0.0, self.nvars))
        return self.nvars

    def _lit_value(self, lit: int) -> int:
        v = self.value[lit >> 1]
        return -v if lit & 1 else v

    def add_clause(self, lits: Iterable[int]) -> bool:
        if not self.ok:
            return False
        self._backtrack(0)
        seen = set()
        clause = []
        for x in lits:
            lit = (x << 1) if x > 0 else ((-x) << 1) | 1
            if lit ^ 1 in seen:
                return True  # tautology
            if lit in seen:
                continue
            val = self._lit_value(lit)
            if val == 1:
                return True
            if val == -1:
                continue
            seen.add(lit)
            clause.append(lit)
        self.n_clauses += 1
        if not clause:
            self.ok = False
            return False
        if len(clause) == 1:
            self._enqueue(clause[0], None)
            if self._propagate() is not None:
                self.ok = False
                return False
            return True
        self.watches[clause[0] ^ 1].append(clause)
        self.watches[clause[1] ^ 1].append(clause)
        return True

    # -- core ----------------------------------------------------------------------

    def _enqueue(self, lit: int, reason) -> None:
        v = lit >> 1
        self.value[v] = -1 if lit & 1 else 1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self):
        """Unit propagation; returns a conflicting clause or None.

        ``watches[l]`` holds the clauses watching the negation of ``l``, i.e.
        the clauses to visit when ``l`` becomes true.
        """
        trail = self.trail
        value = self.value
        watches = self.watches
        level = self.level
        reason = self.reason
        cur_level = len(self.trail_lim)
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            self.propagations += 1
            false_lit = p ^ 1
            ws = watches[p]
            i = j = 0
            n = len(ws)
            while i < n:
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0], c[1] = c[1], false_lit
                first = c[0]
                fv = value[first >> 1]
                if (fv == 1 and not first & 1) or (fv == -1 and first & 1):
                    ws[j] = c
                    j += 1
                    continue
                found = False
                for k in range(2, len(c)):
                    lk = c[k]
                    lv = value[lk >> 1]
                    if lv == 0 or (lv == 1) != bool(lk & 1):
                        c[1], c[k] = lk, false_lit
                        watches[lk ^ 1].append(c)
                        found = True
                        break
                if found:
                    continue
                ws[j] = c
                j += 1
                if fv != 0:
                    # conflict: keep remaining watchers
                    while i < n:
                        ws[j] = ws[i]
                        j += 1
                        i += 1
                    del ws[j:]
                    self.qhead = len(trail)
                    return c
                vv = first >> 1
                value[vv] = -1 if first & 1 else 1
                level[vv] = cur_level
                reason[vv] = c
                trail.append(first)
            del ws[j:]
        return None

    def _bump(self, v: int) -> None:
        act = self.activity[v] + self.var_inc
        self.activity[v] = act
        if act > 1e100:
            self.activity = [a * 1e-100 for a in self.activity]
            self.var_inc *= 1e-100
            self.heap = [(-self.activity[u], u) for u in range(1, self.nvars + 1)
                         if self.value[u] == 0]
            heapq.heapify(self.heap)
        elif self.value[v] == 0:
            heapq.heappush(self.heap, (-act, v))

    def _analyze(self, confl):
        seen = set()
        learnt = [0]
        counter = 0
        p = None
        idx = len(self.trail) - 1
        cur = len(self.trail_lim)
        level = self.level
        while True:
            for q in (confl if p is None else confl[1:]):
                v = q >> 1
                if v not in seen and level[v] > 0:
                    seen.add(v)
                    self._bump(v)
                    if level[v] >= cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while (self.trail[idx] >> 1) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            confl = self.reason[p >> 1]
            seen.discard(p >> 1)
            counter -= 1
            if counter == 0:
                break
            # reason clauses store the implied literal first
            if confl[0] != p:
                k = confl.index(p)
                confl[0], confl[k] = confl[k], confl[0]
        learnt[0] = p ^ 1
        # drop literals implied by the rest of the clause (local minimization)
        keep = set(x >> 1 for x in learnt)
        out = [learnt[0]]
        for q in learnt[1:]:
            r = self.reason[q >> 1]
            if r is None or any((x >> 1) not in keep and level[x >> 1] > 0 for x in r if x != q ^ 1):
                out.append(q)
        learnt = out
        if len(learnt) == 1:
            back = 0
        else:
            mi = max(range(1, len(learnt)), key=lambda k: level[learnt[k] >> 1])
            learnt[1], learnt[mi] = learnt[mi], learnt[1]
            back = level[learnt[1] >> 1]
        return learnt, back

    def _backtrack(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        start = self.trail_lim[lvl]
        value, phase, heap, act = self.value, self.phase, self.heap, self.activity
        for lit in self.trail[start:]:
            v = lit >> 1
            value[v] = 0
            self.reason[v] = None
            phase[v] = not lit & 1
            heapq.heappush(heap, (-act[v], v))
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)
        if len(heap) > 8 * self.nvars + 1024:
            self.heap = [(-act[u], u) for u in range(1, self.nvars + 1) if value[u] == 0]
            heapq.heapify(self.heap)

    def _pick(self) -> int:
        heap, value = self.heap, self.value
        while heap:
            _, v = heapq.heappop(heap)
            if value[v] == 0:
                return v
        return 0

    def _reduce_db(self) -> None:
        self.learnts.sort(key=lambda c: (c.lbd, len(c)))
        keep = len(self.learnts) // 2
        locked = set()
        for lit in self.trail:
            r = self.reason[lit >> 1]
            if r is not None:
                locked.add(id(r))
        removed = set()
        survivors = []
        for i, c in enumerate(self.learnts):
            if i < keep or c.lbd <= 2 or id(c) in locked:
                survivors.append(c)
            else:
                removed.add(id(c))
        if not removed:
            return
        self.learnts = survivors
        for ws in self.watches:
            ws[:] = [c for c in ws if id(c) not in removed]

    def solve(self, assumptions: Sequence[int] = (), conflict_limit: Optional[int] = None,
              deadline: Optional[float] = None) -> Optional[bool]:
        """True (SAT, see ``model``), False (UNSAT) or None (budget exhausted)."""
        if not self.ok:
            return False
        assumps = [(x << 1) if x > 0 else ((-x) << 1) | 1 for x in assumptions]
        self._backtrack(0)
        if self._propagate() is not None:
            self.ok = False
            return False
        restart_no = 1
        budget = 100 * luby(restart_no)
        since_restart = 0
        max_learnts = max(2000, self.n_clauses // 3)
        start_conflicts = self.conflicts
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                since_restart += 1
                if not self.trail_lim:
                    self.ok = False
                    return False
                learnt, back = self._analyze(confl)
                self._backtrack(back)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    c = _Clause(learnt)
                    c.lbd = len({self.level[x >> 1] for x in learnt})
                    self.watches[learnt[0] ^ 1].append(c)
                    self.watches[learnt[1] ^ 1].append(c)
                    self.learnts.append(c)
                    self._enqueue(learnt[0], c)
                self.var_inc *= 1.05
                if conflict_limit is not None and self.conflicts - start_conflicts > conflict_limit:
                    self._backtrack(0)
                    return None
                if deadline is not None and self.conflicts % 64 == 0 and time.monotonic() > deadline:
                    self._backtrack(0)
                    return None
                continue
            if since_restart >= budget:
                restart_no += 1
                budget = 100 * luby(restart_no)
                since_restart = 0
                self._backtrack(0)
                if len(self.learnts) > max_learnts:
                    self._reduce_db()
                    max_learnts = int(max_learnts * 1.1)
                continue
            lvl = len(self.trail_lim)
            if lvl < len(assumps):
                a = assumps[lvl]
                val = self._lit_value(a)
                if val == -1:
                    self._backtrack(0)
                    return False
                self.trail_lim.append(len(self.trail))
                if val == 0:
                    self._enqueue(a, None)
                continue
            v = self._pick()
            if v == 0:
                self.model = [False] + [self.value[u] == 1 for u in range(1, self.nvars + 1)]
                self._backtrack(0)
                return True
            self.decisions += 1
            self.trail_lim.append(len(self.trail))
            self._enqueue((v << 1) | (0 if self.phase[v] else 1), None)

    def model_value(self, lit: int) -> bool:
        v = self.model[abs(lit)]
        return v if lit > 0 else not v


class _Clause(list):
    __slots__ = ("lbd",)
