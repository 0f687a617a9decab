"""The CEGAR driver: pick, count, record or generalize, block, re-bound."""
from __future__ import annotations

import logging
import random
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Mapping

from . import counter as counting
from .counter import CountQuery, DerivedParameters, derive_parameters
from .formula import ProblemInstance, blocking_clause
from .generalize import GeneralizeOutcome, GeneralizeRequest, generalize
from .preprocess import Preprocessed, preprocess
from .heuristics import HEURISTICS, ActivityTable, LeadPool, decision_order, pick_candidate
from .sat import POLARITY_MODES, SatOracle, SolverTimeout, check_deadline

log = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    epsilon: float = 0.8
    delta: float = 0.2
    kappa: float | None = None
    mode: str = "approximate"
    heuristic: str = "leads"
    polarity: str = "rnd"
    symmetry: bool = True
    equiv_literals: bool = True
    seed: int = 0
    timeout: float = 0.0
    progressive_q: int | None = 0
    merge_yz_colors: bool = False
    debug: bool = False

    def __post_init__(self):
        if self.mode not in ("exact", "approximate"):
            raise ValueError(f"unknown oracle mode {self.mode!r}")
        if self.heuristic not in HEURISTICS:
            raise ValueError(f"unknown heuristic {self.heuristic!r}")
        if self.polarity not in POLARITY_MODES:
            raise ValueError(f"unknown polarity {self.polarity!r}")
        if self.kappa is not None and self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if self.mode == "approximate":
            derive_parameters(self.epsilon, self.delta, 0)

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    def parameters(self, x_size: int) -> DerivedParameters:
        if self.exact:
            return DerivedParameters(0.0, 0.0, self.kappa or 0.0, 0.0, 0.0, 0.0)
        p = derive_parameters(self.epsilon, self.delta, x_size)
        if self.kappa is not None:
            p = DerivedParameters(p.eps0, p.eps1, self.kappa, p.delta0, p.delta1, p.delta2)
        return p


@dataclass
class RunStats:
    iterations: int = 0
    sat_calls: int = 0
    count_calls: int = 0
    blocked_clauses: int = 0
    leads_used: int = 0
    generalizations: int = 0
    wall_time: float = 0.0


@dataclass
class MaxCountResult:
    witness: dict[int, bool] | None
    count: int
    upper_bound: int
    status: str
    stats: RunStats = field(default_factory=RunStats)
    params: DerivedParameters | None = None


@dataclass
class LoopState:
    phi_s: ProblemInstance
    x_m: dict[int, bool] | None = None
    n_m: int = 0
    upper_bound: int = 0
    iteration: int = 0
    exhausted: bool = False


def block(state: LoopState, w: Mapping[int, bool]) -> LoopState:
    """Conjoin the negation of the partial witness onto phi_s."""
    state.phi_s = state.phi_s.with_clauses([blocking_clause(w)])
    return state


@dataclass
class GeneralizeEvent:
    """What a trace hook sees for each generalization call."""

    phi_s: ProblemInstance
    x: dict[int, bool]
    n_m: int
    outcome: GeneralizeOutcome


class _Counter:
    def __init__(self, mode: str, rng: random.Random, stats: RunStats, deadline: float | None):
        self.mode = mode
        self.rng = rng
        self.stats = stats
        self.deadline = deadline

    def __call__(self, phi: ProblemInstance, w: Mapping[int, bool], eps: float = 0.0, delta: float = 0.0) -> int:
        self.stats.count_calls += 1
        check_deadline(self.deadline)
        q = CountQuery(phi, dict(w), eps, delta, self.mode)
        return counting.projected_count(q, self.rng, self.deadline).value


def solve_maxcount(phi: ProblemInstance, cfg: SolverConfig,
                   on_generalize: Callable[[GeneralizeEvent], None] | None = None,
                   on_iteration: Callable[[LoopState], None] | None = None,
                   stop_at: int | None = None) -> MaxCountResult:
    """Find a witness over X maximizing the projected count over Y.

    ``stop_at`` ends the search as soon as a candidate reaches that count
    (used by the decision variant).
    """
    t0 = time.monotonic()
    deadline = t0 + cfg.timeout if cfg.timeout else None
    rng = random.Random(cfg.seed)
    stats = RunStats()
    params = cfg.parameters(len(phi.x_vars))
    kappa = params.kappa
    count = _Counter(cfg.mode, rng, stats, deadline)
    sat = SatOracle(phi, cfg.polarity)
    pool = LeadPool()
    activity = ActivityTable()
    state = LoopState(phi)
    cand_thr = (lambda n: n / (1 + params.eps1))

    def count1(p, w):
        return count(p, w, params.eps1, params.delta1)

    def add_block(w):
        if not w:
            state.exhausted = True
            state.phi_s = state.phi_s.with_clauses([()])
        else:
            clause = blocking_clause(w)
            state.phi_s = state.phi_s.with_clauses([clause])
            activity.on_blocking_clause(clause)
        stats.blocked_clauses += 1
        sat.sync(state.phi_s)

    status = "exact" if cfg.exact else "pac"
    try:
        state.upper_bound = count(phi, {}, params.eps0, params.delta0)
        while state.n_m < state.upper_bound / (1 + kappa):
            if stop_at is not None and state.x_m is not None and state.n_m >= stop_at:
                break
            check_deadline(deadline)
            state.iteration += 1
            stats.iterations += 1
            cand = pick_candidate(state.phi_s, state.n_m, state.upper_bound, cfg.heuristic, pool, activity,
                                  rng, sat, count1, cfg.progressive_q, cand_thr(state.n_m), deadline)
            if cand is None:
                state.upper_bound = 0
                break
            stats.leads_used += cand.from_lead
            x = cand.witness
            if cand.complete:
                c = count1(state.phi_s, x)
                if cfg.debug:
                    assert c == count1(phi, x) or not cfg.exact, "stable-psi violated"
            else:
                c = cand.count
            if cand.complete and c > state.n_m:
                state.x_m, state.n_m = x, c
                e = set(x)
                for clause in pool.flush(state.n_m, cand_thr(state.n_m)):
                    state.phi_s = state.phi_s.with_clauses([clause])
                    activity.on_blocking_clause(clause)
                    stats.blocked_clauses += 1
            else:
                req = GeneralizeRequest(x, state.phi_s, state.n_m, params.eps1, params.delta1, c,
                                        _refine_order(cfg, phi, pool, activity, rng))
                out = generalize(req, count1, sat, rng, deadline)
                stats.generalizations += 1
                for w, lc in out.leads:
                    pool.record(w, lc, state.n_m)
                if on_generalize is not None:
                    on_generalize(GeneralizeEvent(state.phi_s, x, state.n_m, out))
                e = out.e_set
            add_block({v: x[v] for v in e})
            state.upper_bound = 0 if state.exhausted else count(state.phi_s, {}, params.eps0, params.delta0)
            if on_iteration is not None:
                on_iteration(state)
    except SolverTimeout:
        status = "timeout"
    stats.sat_calls = sat.calls
    stats.wall_time = time.monotonic() - t0
    if state.x_m is None:
        return MaxCountResult(None, 0, state.upper_bound, status, stats, params)
    return MaxCountResult(dict(state.x_m), state.n_m, state.upper_bound, status, stats, params)


def _refine_order(cfg: SolverConfig, phi: ProblemInstance, pool: LeadPool, activity: ActivityTable,
                  rng: random.Random) -> list[int]:
    return decision_order(cfg.heuristic, phi.sorted_x(), pool, activity, rng)


def solve(phi: ProblemInstance, cfg: SolverConfig, **hooks) -> tuple[MaxCountResult, Preprocessed]:
    """Preprocess as configured, search, and lift the witness back to phi's X variables."""
    pre = preprocess(phi, cfg.symmetry, cfg.equiv_literals, cfg.merge_yz_colors)
    res = solve_maxcount(pre.instance, cfg, **hooks)
    res.witness = pre.witness(res.witness)
    return res, pre


@dataclass
class Decision:
    answer: bool
    probabilistic: bool
    result: MaxCountResult


def decide_dmaxsat(phi: ProblemInstance, bound: int, cfg: SolverConfig) -> Decision:
    """Is there a witness whose count reaches ``bound``?"""
    if bound <= 0:
        return Decision(True, not cfg.exact, MaxCountResult(None, 0, 0, "exact" if cfg.exact else "pac"))
    res, _ = solve(phi, cfg, stop_at=bound)
    return Decision(res.count >= bound, not cfg.exact, res)


def result_dict(res: MaxCountResult) -> dict:
    d = asdict(res)
    if res.witness is not None:
        d["witness"] = {str(k): v for k, v in sorted(res.witness.items())}
    return d
