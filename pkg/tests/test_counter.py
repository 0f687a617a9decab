import math
import random

import pytest
from hypothesis import given, strategies as st

from baxcount.brute import brute_force_count
from baxcount.counter import (CountQuery, approx_projected_count, bounded_count, derive_parameters,
                              exact_projected_count, pivot, projected_count, repetitions)
from baxcount.formula import ProblemInstance, parse_instance

from instances import T1, hashing_instance, random_instance


def _exact(phi, w):
    return exact_projected_count(CountQuery(phi, w)).value


def test_exact_examples():
    phi = parse_instance(T1)
    assert _exact(phi, {1: True}) == 2
    assert _exact(phi, {}) == 4
    phi = ProblemInstance.build([[2, 3], [-1, -3]], [1], [2], 3)
    assert _exact(phi, {1: True}) == 1


def test_unsat_counts_zero_in_both_modes():
    phi = ProblemInstance.build([[1], [-1]], [1], range(2, 14), 13)
    assert _exact(phi, {}) == 0
    est = approx_projected_count(CountQuery(phi, {}, 0.8, 0.2, "approximate"), random.Random(0))
    assert est.value == 0


def test_small_y_space_takes_the_exact_path():
    phi = parse_instance(T1)
    est = approx_projected_count(CountQuery(phi, {1: True}, 0.8, 0.2, "approximate"), random.Random(0))
    assert est.exact and est.value == 2


def test_pivot_and_repetitions_frozen():
    # oracle: ceil(1 + 9.84 (1 + e/(1+e)) (1 + 1/e)^2) and smallest odd t with
    # P[Bin(t, 0.36) >= (t+1)/2] <= delta, evaluated independently with floats
    assert pivot(0.8) == 73
    assert pivot((1.8) ** (1 / 3) - 1) == 368
    assert repetitions(0.1) == 21
    assert repetitions(0.2) == 9
    assert repetitions(0.011) == 65


def test_derived_parameters():
    p = derive_parameters(0.8, 0.2, 3)
    e = 1.8 ** (1 / 3) - 1
    assert p.eps0 == pytest.approx(e) and p.eps1 == pytest.approx(e) and p.kappa == pytest.approx(e)
    assert round(p.eps0, 5) == 0.21644
    assert p.delta0 == pytest.approx(0.1) and p.delta2 == pytest.approx(0.1)
    assert p.delta1 == pytest.approx(0.025)
    assert (1 + p.eps0) ** 3 == pytest.approx(1.8)


@pytest.mark.parametrize("eps,delta", [(0, 0.2), (0.8, 0), (1.2, 0.2), (0.8, 1.0)])
def test_derived_parameters_reject_bad_input(eps, delta):
    with pytest.raises(ValueError):
        derive_parameters(eps, delta, 3)


def test_exact_matches_enumeration():
    rng = random.Random(11)
    for _ in range(300):
        phi = random_instance(rng, 6, 8, 6)
        w = {v: rng.random() < 0.5 for v in phi.x_vars if rng.random() < 0.6}
        assert _exact(phi, w) == brute_force_count(phi, w)


def test_cap_stops_early_but_never_undercounts_below_cap():
    rng = random.Random(5)
    for _ in range(100):
        phi = random_instance(rng, 3, 8, 3)
        full = _exact(phi, {})
        capped = bounded_count(phi, {}, cap=10)
        assert capped == full if full < 10 else capped >= 10


def test_statistical_harness_count_256():
    phi = ProblemInstance.build([[1], [2]], [], range(1, 11), 10)
    assert _exact(phi, {}) == 256
    rng = random.Random(2024)
    lo, hi = math.ceil(256 / 1.8), math.floor(256 * 1.8)
    hits = sum(lo <= approx_projected_count(CountQuery(phi, {}, 0.8, 0.2, "approximate"), rng).value <= hi
               for _ in range(200))
    assert hits >= 160


def test_approximate_tracks_exact_on_hashing_instances():
    rng = random.Random(99)
    bad = 0
    for _ in range(40):
        phi = hashing_instance(rng)
        exact = _exact(phi, {})
        est = projected_count(CountQuery(phi, {}, 0.8, 0.2, "approximate"), rng).value
        bad += not (exact / 1.8 <= est <= exact * 1.8)
    assert bad <= 8


@given(st.integers(0, 10 ** 6))
def test_count_is_monotone_in_the_witness(seed):
    rng = random.Random(seed)
    phi = random_instance(rng, 5, 5, 3)
    xs = sorted(phi.x_vars)
    x = {v: rng.random() < 0.5 for v in xs}
    smaller = set(v for v in xs if rng.random() < 0.5)
    assert _exact(phi, x) <= _exact(phi, {v: x[v] for v in smaller}) <= _exact(phi, {})
