import random

import pytest

from baxcount.brute import brute_force_count, brute_force_counts, brute_force_max_count
from baxcount.cegar import SolverConfig, decide_dmaxsat, result_dict, solve, solve_maxcount
from baxcount.formula import ProblemInstance, parse_instance

from instances import T1, random_instance

EXACT = SolverConfig(mode="exact", symmetry=False, equiv_literals=False)


def test_t1_exact():
    res = solve_maxcount(parse_instance(T1), EXACT)
    assert res.witness == {1: False} and res.count == 4 and res.status == "exact"


def test_vacuous_formula_single_iteration():
    phi = ProblemInstance.build([], [1, 2], [3, 4, 5])
    res = solve_maxcount(phi, EXACT)
    assert res.count == 8 and res.stats.iterations == 1


def test_unsat_has_no_witness():
    res = solve_maxcount(ProblemInstance.build([[1], [-1]], [1], [2]), EXACT)
    assert res.witness is None and res.count == 0


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(heuristic="magic")
    with pytest.raises(ValueError):
        SolverConfig(epsilon=0.0)
    with pytest.raises(ValueError):
        SolverConfig(mode="fuzzy")
    assert SolverConfig(mode="exact").parameters(4).kappa == 0


def test_huge_kappa_stops_after_first_improvement():
    rng = random.Random(8)
    for i in range(40):
        phi = random_instance(rng, 5, 6, 3)
        cfg = SolverConfig(mode="approximate", kappa=float(2 ** 7), seed=i, symmetry=False, equiv_literals=False)
        res = solve_maxcount(phi, cfg)
        if res.witness is not None:
            true = brute_force_count(phi, res.witness)
            e1 = res.params.eps1
            assert true / (1 + e1) <= res.count <= true * (1 + e1)


def test_loop_invariants_in_exact_mode():
    rng = random.Random(21)
    for i in range(60):
        phi = random_instance(rng, 6, 5, 3)
        trace = []

        def on_iter(state):
            models = len(brute_force_counts(ProblemInstance(state.phi_s.clauses, state.phi_s.partition,
                                                            state.phi_s.num_vars)))
            trace.append((state.n_m, state.upper_bound, models))

        res = solve_maxcount(phi, SolverConfig(mode="exact", seed=i, debug=True), on_iteration=on_iter)
        assert res.count == brute_force_max_count(phi)[1]
        prev_models = len(brute_force_counts(phi))
        prev_n, prev_ub = 0, None
        for n_m, ub, models in trace:
            assert n_m >= prev_n
            assert prev_ub is None or ub <= prev_ub
            assert models < prev_models
            prev_n, prev_ub, prev_models = n_m, ub, models


@pytest.mark.parametrize("heuristic", ["leads", "vsids", "rnd", "none"])
@pytest.mark.parametrize("polarity", ["cache", "neg", "pos", "rnd"])
def test_every_heuristic_polarity_pair_is_exact(heuristic, polarity):
    rng = random.Random(hash((heuristic, polarity)) & 0xFFFF)
    for i in range(15):
        phi = random_instance(rng, 6, 6, 4)
        res, _ = solve(phi, SolverConfig(mode="exact", heuristic=heuristic, polarity=polarity, seed=i))
        assert res.count == brute_force_max_count(phi)[1]


def test_progressive_disabled_still_exact():
    rng = random.Random(4)
    for i in range(30):
        phi = random_instance(rng, 6, 6, 3)
        res, _ = solve(phi, SolverConfig(mode="exact", progressive_q=None, seed=i))
        assert res.count == brute_force_max_count(phi)[1]


def test_timeout_reports_status():
    rng = random.Random(0)
    n = 60
    clauses = [[rng.choice((1, -1)) * v for v in rng.sample(range(1, n + 1), 3)] for _ in range(150)]
    phi = ProblemInstance.build(clauses, range(1, 21), range(21, 61), n)
    res = solve_maxcount(phi, SolverConfig(timeout=0.3, seed=0))
    assert res.status == "timeout"


def test_decision_examples():
    phi = parse_instance(T1)
    cfg = SolverConfig(mode="exact")
    assert decide_dmaxsat(phi, 4, cfg).answer
    assert not decide_dmaxsat(phi, 5, cfg).answer
    assert decide_dmaxsat(phi, 0, cfg).answer
    unsat = ProblemInstance.build([[1], [-1]], [1], [2])
    assert decide_dmaxsat(unsat, 0, cfg).answer
    assert decide_dmaxsat(phi, 4, SolverConfig()).probabilistic


def test_result_dict_has_string_keys():
    res = solve_maxcount(parse_instance(T1), EXACT)
    assert result_dict(res)["witness"] == {"1": False}
