"""Expanding a rejected candidate into a whole bounded class of witnesses.

Three passes, always in this order: SAT-based redundancy elimination,
randomized log-elimination (large jumps), then a linear refinement sweep.
Every accepted shrink of E keeps the class count at most n_m (exactly in
exact mode, with high probability in approximate mode).
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .formula import ProblemInstance
from .sat import SatOracle

CountFn = Callable[[ProblemInstance, Mapping[int, bool]], int]


@dataclass
class GeneralizeRequest:
    x: dict[int, bool]
    phi_s: ProblemInstance
    n_m: int
    epsilon: float = 0.0
    delta_1: float = 0.0
    count: int | None = None
    order: Sequence[int] | None = None


@dataclass
class Relaxation:
    phase: str
    removed: frozenset[int]
    estimate: int | None
    accepted: bool


@dataclass
class GeneralizeOutcome:
    e_set: set[int]
    relaxation_log: list[Relaxation] = field(default_factory=list)
    leads: list[tuple[dict[int, bool], int]] = field(default_factory=list)

    @property
    def count_calls(self) -> int:
        return sum(1 for r in self.relaxation_log if r.phase != "redundancy")


def _threshold(req: GeneralizeRequest) -> float:
    return req.n_m / (1 + req.epsilon)


def _sub(x: Mapping[int, bool], e: set[int]) -> dict[int, bool]:
    return {v: x[v] for v in e}


def _ordered(req: GeneralizeRequest, e: set[int]) -> list[int]:
    if req.order is None:
        return sorted(e)
    seen = [v for v in req.order if v in e]
    return seen + sorted(e - set(seen))


def log_gap(n_m: int, c: int) -> int:
    """Integral log-distance between the best count and the current estimate."""
    if n_m <= 0:
        return 0
    return max(0, int(math.floor(math.log2(n_m))) - int(math.floor(math.log2(max(c, 1)))))


def redundancy_elimination(req: GeneralizeRequest, sat: SatOracle, out: GeneralizeOutcome,
                           deadline: float | None = None) -> set[int]:
    """Drop every variable whose flip (against the current x|_E) is UNSAT."""
    e = set(req.x)
    for v in _ordered(req, e):
        if sat.flip_is_unsat(_sub(req.x, e), v, deadline):
            e.discard(v)
            out.relaxation_log.append(Relaxation("redundancy", frozenset([v]), None, True))
    return e


def log_elimination(req: GeneralizeRequest, e: set[int], count: CountFn, rng: random.Random,
                    out: GeneralizeOutcome) -> set[int]:
    e = set(e)
    c = req.count if req.count is not None else count(req.phi_s, _sub(req.x, e))
    k = log_gap(req.n_m, c)
    while k > 0 and e:
        a = frozenset(rng.sample(sorted(e), min(k, len(e))))
        w = _sub(req.x, e - a)
        c = count(req.phi_s, w)
        ok = c <= _threshold(req)
        out.relaxation_log.append(Relaxation("log", a, c, ok))
        if ok:
            e -= a
            k = log_gap(req.n_m, c)
        else:
            if c > req.n_m:
                out.leads.append((w, c))
            k -= 1
    return e


def refinement(req: GeneralizeRequest, e: set[int], count: CountFn, out: GeneralizeOutcome) -> set[int]:
    e = set(e)
    for v in _ordered(req, e):
        w = _sub(req.x, e - {v})
        c = count(req.phi_s, w)
        ok = c <= _threshold(req)
        out.relaxation_log.append(Relaxation("refine", frozenset([v]), c, ok))
        if ok:
            e.discard(v)
        elif c > req.n_m:
            out.leads.append((w, c))
    return e


def generalize(req: GeneralizeRequest, count: CountFn, sat: SatOracle, rng: random.Random,
               deadline: float | None = None) -> GeneralizeOutcome:
    out = GeneralizeOutcome(set(req.x))
    if req.count is not None and req.count > req.n_m:
        return out
    e = redundancy_elimination(req, sat, out, deadline)
    e = log_elimination(req, e, count, rng, out)
    out.e_set = refinement(req, e, count, out)
    return out
