"""Projected model counting: Count_E(phi, x) over the Y variables.

The exact counter is a DPLL search that branches on Y variables only;
X variables outside the witness and all Z variables are existentially
projected (once no Y variable occurs in the residual clauses a single
satisfiability check decides the whole subtree).  The approximate counter
adds random parity constraints over Y and counts cells with the same engine,
in the style of hashing-based (epsilon, delta) counters.
"""
from __future__ import annotations

import math
import random
import statistics
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .formula import FormulaError, ProblemInstance
from .sat import check_deadline

# A parity row is (tuple of variables, parity bit): XOR of the variables == parity.
XorRow = tuple[tuple[int, ...], int]

# Per-repetition failure bound of the hashing core for the pivot below.
CORE_FAILURE_BOUND = 0.36


@dataclass
class CountEstimate:
    value: int
    exact: bool


@dataclass
class CountQuery:
    instance: ProblemInstance
    witness: Mapping[int, bool] = field(default_factory=dict)
    epsilon: float = 0.0
    delta: float = 0.0
    mode: str = "exact"


@dataclass
class _Ctx:
    deadline: float | None = None
    nodes: int = 0

    def tick(self):
        self.nodes += 1
        if self.nodes & 511 == 0:
            check_deadline(self.deadline)


def _propagate(clauses, xors, lits):
    """Assign ``lits`` and unit-propagate over clauses and parity rows.

    Returns (clauses, xors, assigned literal set) or None on conflict.
    """
    true = set()
    pending = list(lits)
    while pending:
        for l in pending:
            if -l in true:
                return None
            true.add(l)
        pending = []
        new_clauses = []
        for c in clauses:
            keep = []
            sat = False
            for l in c:
                if l in true:
                    sat = True
                    break
                if -l not in true:
                    keep.append(l)
            if sat:
                continue
            if not keep:
                return None
            if len(keep) == 1:
                pending.append(keep[0])
            new_clauses.append(keep)
        new_xors = []
        for vs, par in xors:
            rest = []
            for v in vs:
                if v in true:
                    par ^= 1
                elif -v not in true:
                    rest.append(v)
            if not rest:
                if par:
                    return None
                continue
            if len(rest) == 1:
                pending.append(rest[0] if par else -rest[0])
            new_xors.append((rest, par))
        clauses, xors = new_clauses, new_xors
        pending = [l for l in pending if l not in true]
    return clauses, xors, true


def _dpll_sat(clauses, ctx: _Ctx) -> bool:
    ctx.tick()
    if not clauses:
        return True
    occ: dict[int, int] = {}
    for c in clauses:
        w = 3 if len(c) == 2 else 1
        for l in c:
            v = abs(l)
            occ[v] = occ.get(v, 0) + w
    v = max(occ, key=lambda u: (occ[u], -u))
    for l in (v, -v):
        r = _propagate(clauses, (), [l])
        if r is not None and _dpll_sat(r[0], ctx):
            return True
    return False


def _xor_solutions(xors, free: set[int]) -> int:
    """Number of assignments to ``free`` satisfying the parity rows."""
    index = {v: i for i, v in enumerate(sorted(free))}
    rows: list[int] = []
    for vs, par in xors:
        mask = 0
        for v in vs:
            mask ^= 1 << index[v]
        rows.append(mask << 1 | par)
    rank = 0
    pivots: list[int] = []
    for r in rows:
        for p in pivots:
            if r ^ p < r:
                r ^= p
        if r == 0:
            continue
        if r == 1:
            return 0
        pivots.append(r)
        pivots.sort(reverse=True)
        rank += 1
    return 1 << (len(free) - rank)


def _count(clauses, xors, yfree: set[int], cap: int, ctx: _Ctx) -> int:
    ctx.tick()
    if not clauses:
        return _xor_solutions(xors, yfree) if xors else 1 << len(yfree)
    occ: dict[int, int] = {}
    for c in clauses:
        for l in c:
            v = abs(l)
            if v in yfree:
                occ[v] = occ.get(v, 0) + 1
    if not occ:
        if not _dpll_sat(clauses, ctx):
            return 0
        return _xor_solutions(xors, yfree) if xors else 1 << len(yfree)
    v = max(occ, key=lambda u: (occ[u], -u))
    total = 0
    for l in (v, -v):
        r = _propagate(clauses, xors, [l])
        if r is None:
            continue
        c2, x2, assigned = r
        sub = yfree - {abs(a) for a in assigned}
        total += _count(c2, x2, sub, cap - total if cap else 0, ctx)
        if cap and total >= cap:
            return total
    return total


def _witness_lits(phi: ProblemInstance, witness: Mapping[int, bool]) -> list[int]:
    for v in witness:
        if v not in phi.x_vars:
            raise FormulaError(f"witness assigns non-X variable {v}")
    return [v if b else -v for v, b in sorted(witness.items())]


def bounded_count(phi: ProblemInstance, witness: Mapping[int, bool] | None = None,
                  xors: Sequence[XorRow] = (), cap: int = 0, deadline: float | None = None) -> int:
    """Projected count, stopping once ``cap`` is reached (cap 0 = unbounded)."""
    ctx = _Ctx(deadline)
    if any(not c for c in phi.clauses):
        return 0
    units = [c[0] for c in phi.clauses if len(c) == 1]
    units += [(vs[0] if par else -vs[0]) for vs, par in xors if len(vs) == 1]
    if any(not vs and par for vs, par in xors):
        return 0
    r = _propagate(phi.clauses, list(xors), _witness_lits(phi, witness or {}) + units)
    if r is None:
        return 0
    clauses, xs, assigned = r
    yfree = set(phi.y_vars) - {abs(a) for a in assigned}
    return _count(clauses, xs, yfree, cap, ctx)


def exact_projected_count(q: CountQuery, deadline: float | None = None) -> CountEstimate:
    return CountEstimate(bounded_count(q.instance, q.witness, deadline=deadline), True)


def pivot(epsilon: float) -> int:
    """Cell-size threshold of the hashing counter for tolerance epsilon."""
    return math.ceil(1 + 9.84 * (1 + epsilon / (1 + epsilon)) * (1 + 1 / epsilon) ** 2)


def _binom_tail_ge(t: int, k: int, p: float) -> float:
    return sum(math.comb(t, i) * p ** i * (1 - p) ** (t - i) for i in range(k, t + 1))


def repetitions(delta: float) -> int:
    """Smallest odd t whose median fails with probability <= delta."""
    t = 1
    while _binom_tail_ge(t, (t + 1) // 2, CORE_FAILURE_BOUND) > delta:
        t += 2
    return t


def _random_rows(y: list[int], count: int, rng: random.Random) -> list[XorRow]:
    rows = []
    for _ in range(count):
        vs = tuple(v for v in y if rng.random() < 0.5)
        rows.append((vs, rng.randrange(2)))
    return rows


def approx_projected_count(q: CountQuery, rng: random.Random,
                           deadline: float | None = None) -> CountEstimate:
    """(epsilon, delta)-approximate projected count via random parity hashing."""
    eps, delta = q.epsilon, q.delta
    if not eps > 0 or not 0 < delta < 1:
        raise ValueError("approximate counting needs epsilon > 0 and 0 < delta < 1")
    phi, w = q.instance, q.witness
    thresh = pivot(eps)
    ny = len(phi.y_vars)
    if (1 << ny) <= thresh:
        return CountEstimate(bounded_count(phi, w, deadline=deadline), True)
    c = bounded_count(phi, w, cap=thresh, deadline=deadline)
    if c < thresh:
        return CountEstimate(c, True)
    y = phi.sorted_y()
    estimates = []
    m_prev = 1
    for _ in range(repetitions(delta)):
        rows = _random_rows(y, ny, rng)
        cache: dict[int, int] = {}

        def cell(m: int) -> int:
            if m not in cache:
                cache[m] = bounded_count(phi, w, rows[:m], cap=thresh, deadline=deadline)
            return cache[m]

        # smallest m with a small cell; cell counts are non-increasing in m
        lo, hi = 0, None
        m = max(1, min(m_prev, ny))
        step = 1
        while True:
            if cell(m) < thresh:
                hi = m
                break
            lo = m
            if m == ny:
                break
            m = min(ny, m + step)
            step *= 2
        if hi is None:
            continue
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if cell(mid) < thresh:
                hi = mid
            else:
                lo = mid
        m_prev = hi
        estimates.append(cell(hi) << hi)
    if not estimates:
        return CountEstimate(bounded_count(phi, w, deadline=deadline), True)
    return CountEstimate(int(statistics.median_low(estimates)), False)


def projected_count(q: CountQuery, rng: random.Random | None = None,
                    deadline: float | None = None) -> CountEstimate:
    if q.mode == "exact":
        return exact_projected_count(q, deadline)
    return approx_projected_count(q, rng or random.Random(0), deadline)


@dataclass(frozen=True)
class DerivedParameters:
    eps0: float
    eps1: float
    kappa: float
    delta0: float
    delta1: float
    delta2: float


def derive_parameters(epsilon: float, delta: float, x_size: int) -> DerivedParameters:
    """Split global (epsilon, delta) into per-oracle tolerances and confidences."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if x_size < 0:
        raise ValueError("x_size must be non-negative")
    e = (1 + epsilon) ** (1 / 3) - 1
    return DerivedParameters(e, e, e, delta / 2, delta / (2 * (x_size + 1)), delta / 2)
