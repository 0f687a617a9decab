import random

from hypothesis import given, strategies as st

from baxcount.brute import brute_force_count
from baxcount.formula import ProblemInstance
from baxcount.generalize import (GeneralizeOutcome, GeneralizeRequest, generalize, log_elimination, log_gap,
                                 redundancy_elimination, refinement)
from baxcount.sat import SatOracle

from instances import random_instance


def exact(phi, w):
    return brute_force_count(phi, w)


def test_redundancy_removes_rigid_variable_only():
    phi = ProblemInstance.build([[1]], [1, 2], [])
    req = GeneralizeRequest({1: True, 2: True}, phi, 0)
    assert redundancy_elimination(req, SatOracle(phi), GeneralizeOutcome(set())) == {2}


def test_fully_rigid_witness_generalizes_to_empty():
    phi = ProblemInstance.build([[1], [-2]], [1, 2], [3])
    req = GeneralizeRequest({1: True, 2: False}, phi, 2)
    assert redundancy_elimination(req, SatOracle(phi), GeneralizeOutcome(set())) == set()


def test_log_phase_idle_when_gap_is_zero():
    phi = ProblemInstance.build([], [1, 2], [3])
    req = GeneralizeRequest({1: True, 2: True}, phi, 2, count=2)
    out = GeneralizeOutcome(set())
    calls = []
    e = log_elimination(req, {1, 2}, lambda p, w: calls.append(w) or 2, random.Random(0), out)
    assert e == {1, 2} and not calls


def test_refinement_on_empty_set_makes_no_calls():
    phi = ProblemInstance.build([], [1], [2])
    out = GeneralizeOutcome(set())
    assert refinement(GeneralizeRequest({1: True}, phi, 1), set(), lambda p, w: 1 / 0, out) == set()
    assert out.count_calls == 0


def test_large_best_count_empties_the_class():
    phi = ProblemInstance.build([[1, 2, 3]], [1, 2], [3, 4])
    req = GeneralizeRequest({1: False, 2: False}, phi, 4, count=2)
    out = generalize(req, exact, SatOracle(phi), random.Random(0))
    assert out.e_set == set()


def test_better_candidate_is_not_generalized():
    phi = ProblemInstance.build([], [1, 2], [3])
    out = generalize(GeneralizeRequest({1: True, 2: True}, phi, 1, count=2), exact, SatOracle(phi),
                     random.Random(0))
    assert out.e_set == {1, 2} and not out.relaxation_log


def test_log_gap():
    assert log_gap(16, 2) == 3
    assert log_gap(16, 0) == 4
    assert log_gap(3, 5) == 0
    assert log_gap(0, 0) == 0


def _run(seed):
    rng = random.Random(seed)
    phi = random_instance(rng, 6, 6, 4)
    xs = sorted(phi.x_vars)
    if not xs:
        return None
    # any X-model; use its count as n_m so the contract Count(x) <= n_m holds
    from baxcount.brute import brute_force_counts
    counts = brute_force_counts(phi)
    if not counts:
        return None
    tup = rng.choice(sorted(counts))
    x = dict(zip(xs, tup))
    n_m = counts[tup] + rng.randint(0, 2)
    req = GeneralizeRequest(x, phi, n_m, order=xs)
    return phi, x, n_m, generalize(req, exact, SatOracle(phi), rng)


@given(st.integers(0, 10 ** 6))
def test_returned_class_is_bounded_and_locally_minimal(seed):
    r = _run(seed)
    if r is None:
        return
    phi, x, n_m, out = r
    e = out.e_set
    assert exact(phi, {v: x[v] for v in e}) <= n_m
    for v in e:
        assert exact(phi, {u: x[u] for u in e - {v}}) > n_m
    phases = [rel.phase for rel in out.relaxation_log]
    assert phases == sorted(phases, key=["redundancy", "log", "refine"].index)
    log_calls = sum(p == "log" for p in phases)
    refine_calls = sum(p == "refine" for p in phases)
    assert refine_calls <= len(x)
    assert log_calls <= len(x) * (n_m.bit_length() + 1)
    for w, c in out.leads:
        assert c > n_m and exact(phi, w) == c
