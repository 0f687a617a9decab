"""Assumption-based CDCL solver used for candidate picking and flip tests.

Two-watched-literal propagation, first-UIP learning, VSIDS activity and
Luby restarts.  Small and unoptimised; the instances driven through it are
desk-sized.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .formula import Assignment, FormulaError, ProblemInstance

POLARITY_MODES = ("cache", "neg", "pos", "rnd")


class SolverTimeout(Exception):
    """Raised from inside an oracle when the run deadline has passed."""


def check_deadline(deadline: float | None) -> None:
    if deadline is not None and time.monotonic() > deadline:
        raise SolverTimeout()


@dataclass
class SatQuery:
    instance: ProblemInstance
    assumptions: Sequence[int] = ()
    decision_order: Sequence[int] | None = None
    polarity_mode: str = "neg"


@dataclass
class SatResult:
    status: str  # "SAT" | "UNSAT"
    model: Assignment | None = None
    decisions: int = 0

    @property
    def sat(self) -> bool:
        return self.status == "SAT"


def _luby(i: int) -> int:
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


class SatSolver:
    """Incremental CDCL engine over a growing clause set.

    Clauses may be added between :meth:`solve` calls; learned clauses stay
    valid because the clause set only grows.
    """

    def __init__(self, num_vars: int, clauses: Iterable[Sequence[int]] = ()):
        self.num_vars = 0
        self.val: list[int] = [0]
        self.level: list[int] = [0]
        self.reason: list[list[int] | None] = [None]
        self.activity: list[float] = [0.0]
        self.phase: list[bool] = [False]
        self.watches: list[list[list[int]]] = [[], []]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.var_inc = 1.0
        self.var_decay = 0.95
        self.root_unsat = False
        self.n_clauses = 0
        self.n_learnts = 0
        self.conflicts = 0
        self.decisions = 0
        self.ensure_vars(num_vars)
        for c in clauses:
            self.add_clause(c)

    # -- bookkeeping -------------------------------------------------------
    def ensure_vars(self, n: int) -> None:
        while self.num_vars < n:
            self.num_vars += 1
            self.val.append(0)
            self.level.append(0)
            self.reason.append(None)
            self.activity.append(0.0)
            self.phase.append(False)
            self.watches.append([])
            self.watches.append([])

    @staticmethod
    def _widx(l: int) -> int:
        return 2 * l if l > 0 else -2 * l + 1

    def _value(self, l: int) -> int:
        v = self.val[l if l > 0 else -l]
        return v if l > 0 else -v

    def _enqueue(self, l: int, reason: list[int] | None) -> None:
        v = l if l > 0 else -l
        self.val[v] = 1 if l > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(l)

    def _backtrack(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        stop = self.trail_lim[lvl]
        for l in self.trail[stop:]:
            v = l if l > 0 else -l
            self.phase[v] = l > 0
            self.val[v] = 0
            self.reason[v] = None
        del self.trail[stop:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def add_clause(self, clause: Sequence[int]) -> bool:
        """Add a clause at the root level. Returns False once the clause set is UNSAT."""
        self._backtrack(0)
        if self.root_unsat:
            return False
        lits: list[int] = []
        for l in clause:
            if abs(l) > self.num_vars:
                self.ensure_vars(abs(l))
            val = self._value(l)
            if val == 1 or -l in lits:
                return True
            if val == 0 and l not in lits:
                lits.append(l)
        self.n_clauses += 1
        if not lits:
            self.root_unsat = True
            return False
        if len(lits) == 1:
            self._enqueue(lits[0], None)
            if self._propagate() is not None:
                self.root_unsat = True
                return False
            return True
        self.watches[self._widx(lits[0])].append(lits)
        self.watches[self._widx(lits[1])].append(lits)
        return True

    # -- core --------------------------------------------------------------
    def _propagate(self) -> list[int] | None:
        trail = self.trail
        val = self.val
        watches = self.watches
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            false_lit = -p
            wl = watches[2 * false_lit if false_lit > 0 else -2 * false_lit + 1]
            i = 0
            n = len(wl)
            while i < n:
                c = wl[i]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], false_lit
                first = c[0]
                fv = val[first] if first > 0 else -val[-first]
                if fv == 1:
                    i += 1
                    continue
                moved = False
                for k in range(2, len(c)):
                    q = c[k]
                    qv = val[q] if q > 0 else -val[-q]
                    if qv != -1:
                        c[1], c[k] = q, false_lit
                        watches[2 * q if q > 0 else -2 * q + 1].append(c)
                        wl[i] = wl[n - 1]
                        wl.pop()
                        n -= 1
                        moved = True
                        break
                if moved:
                    continue
                if fv == -1:
                    self.qhead = len(trail)
                    return c
                self._enqueue(first, c)
                i += 1
        return None

    def _bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            self.activity = [a * 1e-100 for a in self.activity]
            self.var_inc *= 1e-100

    def _analyze(self, confl: list[int]) -> tuple[list[int], int]:
        seen = set()
        learnt = [0]
        counter = 0
        p = None
        idx = len(self.trail) - 1
        cur = len(self.trail_lim)
        level = self.level
        while True:
            for q in (confl if p is None else confl[1:]):
                v = q if q > 0 else -q
                if v not in seen and level[v] > 0:
                    seen.add(v)
                    self._bump(v)
                    if level[v] >= cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while True:
                l = self.trail[idx]
                if (l if l > 0 else -l) in seen:
                    break
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            pv = p if p > 0 else -p
            confl = self.reason[pv]
            seen.discard(pv)
            counter -= 1
            if counter == 0:
                break
        learnt[0] = -p
        if len(learnt) == 1:
            return learnt, 0
        best = 1
        for i in range(2, len(learnt)):
            if level[abs(learnt[i])] > level[abs(learnt[best])]:
                best = i
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, level[abs(learnt[1])]

    def _pick_branch(self, order: Sequence[int] | None, polarity: str, rng: random.Random) -> int:
        val = self.val
        var = 0
        if order:
            for v in order:
                if val[v] == 0:
                    var = v
                    break
        if not var:
            best = -1.0
            act = self.activity
            for v in range(1, self.num_vars + 1):
                if val[v] == 0 and act[v] > best:
                    best = act[v]
                    var = v
        if not var:
            return 0
        if polarity == "cache":
            sign = self.phase[var]
        elif polarity == "pos":
            sign = True
        elif polarity == "rnd":
            sign = rng.random() < 0.5
        else:
            sign = False
        return var if sign else -var

    def solve(self, assumptions: Sequence[int] = (), decision_order: Sequence[int] | None = None,
              polarity: str = "neg", rng: random.Random | None = None,
              deadline: float | None = None) -> SatResult:
        if polarity not in POLARITY_MODES:
            raise ValueError(f"unknown polarity mode {polarity!r}")
        rng = rng or random.Random(0)
        for a in assumptions:
            if abs(a) > self.num_vars or a == 0:
                raise FormulaError(f"assumption {a} references an unknown variable")
        check_deadline(deadline)
        self._backtrack(0)
        if self.root_unsat:
            return SatResult("UNSAT")
        if self._propagate() is not None:
            self.root_unsat = True
            return SatResult("UNSAT")
        decisions = 0
        restart_idx = 0
        budget = 100 * _luby(restart_idx)
        conflicts_here = 0
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                conflicts_here += 1
                if not self.trail_lim:
                    self.root_unsat = True
                    return SatResult("UNSAT", decisions=decisions)
                if self.conflicts & 255 == 0:
                    check_deadline(deadline)
                learnt, bt = self._analyze(confl)
                self._backtrack(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self.watches[self._widx(learnt[0])].append(learnt)
                    self.watches[self._widx(learnt[1])].append(learnt)
                    self.n_learnts += 1
                    self._enqueue(learnt[0], learnt)
                self.var_inc /= self.var_decay
                continue
            if conflicts_here >= budget:
                conflicts_here = 0
                restart_idx += 1
                budget = 100 * _luby(restart_idx)
                self._backtrack(0)
                continue
            nxt = 0
            while len(self.trail_lim) < len(assumptions):
                a = assumptions[len(self.trail_lim)]
                av = self._value(a)
                if av == 1:
                    self.trail_lim.append(len(self.trail))
                elif av == -1:
                    self._backtrack(0)
                    return SatResult("UNSAT", decisions=decisions)
                else:
                    nxt = a
                    break
            if not nxt:
                nxt = self._pick_branch(decision_order, polarity, rng)
                if not nxt:
                    model = {v: self.val[v] == 1 for v in range(1, self.num_vars + 1)}
                    for l in self.trail:
                        self.phase[abs(l)] = l > 0
                    self._backtrack(0)
                    return SatResult("SAT", model, decisions)
            decisions += 1
            self.decisions += 1
            if decisions & 1023 == 0:
                check_deadline(deadline)
            self.trail_lim.append(len(self.trail))
            self._enqueue(nxt, None)


def _verify(q: SatQuery, res: SatResult) -> SatResult:
    if res.sat:
        m = res.model
        if not q.instance.satisfied_by(m):
            raise RuntimeError("SAT model violates a clause")
        for a in q.assumptions:
            if m[abs(a)] != (a > 0):
                raise RuntimeError("SAT model violates an assumption")
    return res


def solve(q: SatQuery, rng: random.Random | None = None, deadline: float | None = None) -> SatResult:
    """One-shot SAT query; the model (if any) is checked against every clause and assumption."""
    s = SatSolver(q.instance.num_vars, q.instance.clauses)
    res = s.solve(q.assumptions, q.decision_order, q.polarity_mode, rng, deadline)
    return _verify(q, res)


def flip_is_unsat(phi: ProblemInstance, x: Mapping[int, bool], v: int,
                  solver: SatSolver | None = None, deadline: float | None = None) -> bool:
    """True iff phi is UNSAT under x on its other keys and the flipped value of v."""
    if v not in phi.x_vars:
        raise FormulaError(f"variable {v} is not a witness variable")
    if v not in x:
        raise FormulaError(f"variable {v} is not assigned by the witness")
    assumptions = [u if b else -u for u, b in sorted(x.items()) if u != v]
    assumptions.append(-v if x[v] else v)
    if solver is None:
        solver = SatSolver(phi.num_vars, phi.clauses)
    return not solver.solve(assumptions, deadline=deadline).sat


@dataclass
class SatOracle:
    """Incremental solver bound to a growing instance, with call statistics."""

    instance: ProblemInstance
    polarity: str = "neg"
    calls: int = 0
    _engine: SatSolver = field(init=False, repr=False)
    _synced: int = field(init=False, default=0, repr=False)

    def __post_init__(self):
        self._engine = SatSolver(self.instance.num_vars)
        self.sync(self.instance)

    def sync(self, instance: ProblemInstance) -> None:
        """Feed clauses appended since the last sync (instances only grow)."""
        self._engine.ensure_vars(instance.num_vars)
        for c in instance.clauses[self._synced:]:
            self._engine.add_clause(c)
        self._synced = len(instance.clauses)
        self.instance = instance

    def solve(self, assumptions: Sequence[int] = (), decision_order: Sequence[int] | None = None,
              rng: random.Random | None = None, deadline: float | None = None) -> SatResult:
        self.calls += 1
        res = self._engine.solve(assumptions, decision_order, self.polarity, rng, deadline)
        return _verify(SatQuery(self.instance, assumptions, decision_order, self.polarity), res)

    def flip_is_unsat(self, x: Mapping[int, bool], v: int, deadline: float | None = None) -> bool:
        self.calls += 1
        return flip_is_unsat(self.instance, x, v, self._engine, deadline)
