"""Candidate selection: decision orders, the leads pool and progressive candidates."""
from __future__ import annotations

import bisect
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .formula import Clause, ProblemInstance, blocking_clause
from .sat import SatOracle

HEURISTICS = ("leads", "vsids", "rnd", "none")

POOL_CAPACITY = 64


@dataclass(order=True)
class Lead:
    sort_key: tuple = field(init=False, repr=False)
    relaxation: dict[int, bool] = field(compare=False)
    estimated_count: int = field(compare=False)

    def __post_init__(self):
        self.sort_key = (-self.estimated_count, len(self.relaxation), sorted(self.relaxation.items()))


class LeadPool:
    """Relaxations that looked better than the current best, best first.

    Ordered by estimated count (descending), then relaxation size (ascending).
    """

    def __init__(self, capacity: int = POOL_CAPACITY):
        self.capacity = capacity
        self.leads: list[Lead] = []

    def __len__(self):
        return len(self.leads)

    def __iter__(self):
        return iter(self.leads)

    def head(self) -> Lead | None:
        return self.leads[0] if self.leads else None

    def pop_head(self) -> Lead:
        return self.leads.pop(0)

    def record(self, w: Mapping[int, bool], count: int, n_m: int) -> bool:
        """Insert a lead; rejected unless count > n_m. Duplicates keep the larger count."""
        if count <= n_m or not w:
            return False
        w = dict(w)
        for i, old in enumerate(self.leads):
            if old.relaxation == w:
                if old.estimated_count >= count:
                    return False
                del self.leads[i]
                break
        bisect.insort(self.leads, Lead(w, count))
        del self.leads[self.capacity:]
        return True

    def flush(self, n_m: int, block_threshold: float | None = None) -> list[Clause]:
        """Drop leads with count <= n_m; return blocking clauses for those provably bounded.

        ``block_threshold`` defaults to n_m; approximate runs pass the tighter
        n_m/(1+eps) so that only confidently bounded classes are blocked.
        """
        limit = n_m if block_threshold is None else block_threshold
        keep, clauses = [], []
        for lead in self.leads:
            if lead.estimated_count > n_m:
                keep.append(lead)
            elif lead.estimated_count <= limit:
                clauses.append(blocking_clause(lead.relaxation))
        self.leads = keep
        return clauses


def record_lead(pool: LeadPool, w: Mapping[int, bool], count: int, n_m: int) -> LeadPool:
    pool.record(w, count, n_m)
    return pool


def flush_stale_leads(pool: LeadPool, n_m: int) -> tuple[LeadPool, list[Clause]]:
    clauses = pool.flush(n_m)
    return pool, clauses


class ActivityTable:
    """Literal scores bumped by blocking clauses and decayed after each one."""

    def __init__(self, bump_amount: float = 1.0, decay_factor: float = 0.95, rescale_at: float = 1e100):
        self.bump_amount = bump_amount
        self.decay_factor = decay_factor
        self.rescale_at = rescale_at
        self.scores: dict[int, float] = {}

    def score(self, literal: int) -> float:
        return self.scores.get(literal, 0.0)

    def on_blocking_clause(self, clause: Sequence[int]) -> None:
        for l in clause:
            self.scores[l] = self.scores.get(l, 0.0) + self.bump_amount
        for l in self.scores:
            self.scores[l] *= self.decay_factor
        if any(s > self.rescale_at for s in self.scores.values()):
            for l in self.scores:
                self.scores[l] /= self.rescale_at


def on_blocking_clause(activity: ActivityTable, clause: Sequence[int]) -> ActivityTable:
    activity.on_blocking_clause(clause)
    return activity


def decision_order(heuristic: str, x_vars: Sequence[int], pool: LeadPool,
                   activity: ActivityTable, rng: random.Random) -> list[int]:
    xs = sorted(x_vars)
    if heuristic == "none":
        return xs
    if heuristic == "rnd":
        rng.shuffle(xs)
        return xs
    if heuristic == "vsids":
        return sorted(xs, key=lambda v: (-max(activity.score(v), activity.score(-v)), v))
    if heuristic == "leads":
        if not len(pool):
            return xs
        freq = Counter(v for lead in pool for v in lead.relaxation)
        return sorted(xs, key=lambda v: (-freq[v], v))
    raise ValueError(f"unknown heuristic {heuristic!r}")


@dataclass
class Candidate:
    witness: dict[int, bool]
    complete: bool
    count: int | None = None
    sat_decisions: int = 0
    from_lead: bool = False


def pick_candidate(phi_s: ProblemInstance, n_m: int, upper_bound: int | None, heuristic: str,
                   pool: LeadPool, activity: ActivityTable, rng: random.Random, sat: SatOracle,
                   count: Callable[[ProblemInstance, Mapping[int, bool]], int] | None = None,
                   progressive_q: int | None = None, threshold: float | None = None,
                   deadline: float | None = None) -> Candidate | None:
    """Pick the next witness from M_X(phi_s); None once phi_s has no X-model.

    With ``progressive_q`` set, the chosen model is revealed ``q`` literals
    at a time and returned early as a partial witness as soon as its class
    count drops to ``threshold`` (default n_m).
    """
    thr = n_m if threshold is None else threshold
    xs = phi_s.sorted_x()
    progressive = progressive_q is not None and count is not None
    if progressive and upper_bound is not None and upper_bound <= thr:
        return Candidate({}, False, upper_bound, 0)
    order = decision_order(heuristic, xs, pool, activity, rng)
    assumptions: list[int] = []
    if heuristic == "leads" and len(pool):
        head = pool.head()
        assumptions = [v if b else -v for v, b in sorted(head.relaxation.items())]
    res = sat.solve(assumptions, order, rng, deadline)
    from_lead = bool(assumptions) and res.sat
    if not res.sat and assumptions:
        pool.pop_head()
        assumptions = []
        res = sat.solve([], order, rng, deadline)
    if not res.sat:
        return None
    x = {v: res.model[v] for v in xs}
    if not progressive:
        return Candidate(x, True, None, res.decisions, from_lead)
    reveal = [abs(a) for a in assumptions] + [v for v in order if v not in {abs(a) for a in assumptions}]
    q = progressive_q or max(1, math.ceil(len(xs) / 4))
    for size in range(q, len(reveal), q):
        w = {v: x[v] for v in reveal[:size]}
        c = count(phi_s, w)
        if c <= thr:
            return Candidate(w, False, c, res.decisions, from_lead)
    return Candidate(x, True, None, res.decisions, from_lead)
