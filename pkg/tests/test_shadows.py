"""Slice diagram construction, elementary slices, and concatenation."""

from __future__ import annotations

import random

import pytest

from tanglehfk.shadows import (
    Shadow,
    as_mirror,
    compose,
    composable,
    cross_inv,
    elementary_cap,
    elementary_crossing,
    elementary_cup,
    elementary_straight,
    half_slots,
    insert_gap_left,
    insert_gap_right,
    inv_pairs,
    is_idempotent,
    left_algebra_shadow,
    left_contractible,
    make_shadow,
    right_algebra_shadow,
    right_contractible,
    shadow_from_json,
    shadow_inv_counts,
    shadow_to_json,
    wedge_compatible,
)

from conftest import random_shadow


def test_smallest_shadow():
    P = make_shadow(1, 1, [], [])
    assert P.xi == () and P.omega == () and not P.mirror


def test_straight_two_strands():
    P = elementary_straight((1, -1))
    assert (P.m, P.n) == (3, 3)
    assert P.xi == ((2, 2),)
    assert P.omega == ((1, 1),)


def test_straight_four_strands():
    P = elementary_straight((1, -1, 1, -1))
    assert (P.m, P.n) == (5, 5)
    assert P.xi == ((2, 2), (4, 4))
    assert P.omega == ((1, 1), (3, 3))


def test_make_shadow_rejects_duplicate_source():
    with pytest.raises(ValueError):
        make_shadow(4, 4, [(2, 1), (2, 3)], [])


def test_make_shadow_rejects_out_of_range():
    with pytest.raises(ValueError):
        make_shadow(3, 3, [(3, 1)], [])
    with pytest.raises(ValueError):
        make_shadow(3, 3, [], [(1, 0)])


def test_crossing_swaps_two_slots():
    P = elementary_crossing((1, -1, 1, -1), 2)
    assert (P.m, P.n) == (5, 5)
    assert P.xi == ((1, 2), (4, 4))
    assert P.omega == ((1, 2), (3, 3))


def test_crossing_index_range():
    with pytest.raises(ValueError):
        elementary_crossing((1, -1), 1)
    with pytest.raises(ValueError):
        elementary_crossing((1, -1), 3)


def test_cap_requires_opposite_signs():
    with pytest.raises(ValueError):
        elementary_cap((1, 1), 1)


def test_cap_two_strands():
    P = elementary_cap((1, -1), 1)
    assert (P.m, P.n) == (3, 2)
    assert P.xi == ((1, 2),)
    assert P.omega == ((1, 1),)
    assert P.xi_sources & P.omega_targets == {1}


def test_cap_four_strands_middle():
    P = elementary_cap((1, 1, -1, 1), 2)
    assert (P.m, P.n) == (5, 4)
    assert P.xi == ((2, 3),)
    assert P.omega == ((1, 1), (2, 2), (4, 3))
    assert P.xi_sources & P.omega_targets == {2}


def test_cup_two_strands():
    P = elementary_cup((1, -1), 1)
    assert (P.m, P.n) == (2, 3)
    assert P.xi == ((2, 1),)
    assert P.omega == ((1, 1),)
    assert P.xi_targets & P.omega_sources == {1}


def test_gap_insertion_shifts_slots():
    P = elementary_straight((1, -1))
    L = insert_gap_left(P, 1)
    assert (L.m, L.n) == (4, 3)
    assert L.xi == ((2, 3),) and L.omega == ((2, 1),)
    R = insert_gap_right(P, 3)
    assert (R.m, R.n) == (3, 4)
    assert R.xi == ((2, 2),) and R.omega == ((1, 1),)


def test_gap_index_range():
    P = elementary_straight((1, -1))
    with pytest.raises(ValueError):
        insert_gap_left(P, 0)
    with pytest.raises(ValueError):
        insert_gap_right(P, 4)


def test_inv_helpers():
    assert inv_pairs(((1, 2), (2, 1))) == 1
    assert inv_pairs(((1, 1), (2, 2), (3, 3))) == 0
    assert cross_inv(((1, 2),), ((2, 1),)) == 1
    assert cross_inv(((1, 1),), ((1, 2),)) == 0


def test_compose_straight_idempotent():
    E = elementary_straight((1, -1, 1))
    assert compose(E, E) == E
    assert is_idempotent(E)
    assert composable(E, E)


def test_compose_straight_then_crossing():
    E = elementary_straight((1, -1))
    X = elementary_crossing((1, -1), 2)
    assert compose(E, X) == X
    assert compose(X, elementary_straight((-1, 1))) == X
    assert composable(E, X)


def test_compose_mismatch_raises():
    E = elementary_straight((1, -1))
    with pytest.raises(ValueError):
        compose(E, elementary_straight((1, -1, 1)))
    with pytest.raises(ValueError):
        compose(E, elementary_straight((-1, 1)))


def test_double_crossing_not_composable():
    X1 = elementary_crossing((1, -1), 2)
    X2 = elementary_crossing((-1, 1), 2)
    P = compose(X1, X2)
    assert P == elementary_straight((1, -1))
    assert shadow_inv_counts(X1) == (0, 0, 1)
    assert shadow_inv_counts(X2) == (0, 0, 1)
    assert not composable(X1, X2)


def test_algebra_shadows_of_plain_slice():
    X = elementary_crossing((1, -1, 1, -1), 2)
    L = left_algebra_shadow(X)
    R = right_algebra_shadow(X)
    assert L == make_shadow(5, 5, [(2, 2), (4, 4)], [(1, 1), (3, 3)])
    assert R == make_shadow(5, 5, [(1, 1), (4, 4)], [(2, 2), (3, 3)])
    assert is_idempotent(L) and is_idempotent(R)


def test_wedge_compatibility_and_shared_algebra():
    P1 = as_mirror(elementary_straight((1, -1)))
    P2 = elementary_straight((-1, 1))
    assert wedge_compatible(P1, P2)
    assert wedge_compatible(P2, P1)
    assert not wedge_compatible(P1, elementary_straight((1, -1)))
    assert not wedge_compatible(P1, as_mirror(P2))
    assert not wedge_compatible(elementary_straight((1, -1)), P2)
    assert right_algebra_shadow(P1) == left_algebra_shadow(P2)

    Q1 = elementary_straight((1, -1))
    Q2 = as_mirror(elementary_straight((-1, 1)))
    assert wedge_compatible(Q1, Q2)
    assert right_algebra_shadow(Q1) == left_algebra_shadow(Q2)


def test_contractible_ends():
    first = as_mirror(elementary_cap((-1, 1), 1))
    assert first == make_shadow(3, 2, [(1, 1)], [(2, 1)], mirror=True)
    assert left_contractible(first)
    assert not right_contractible(first)

    last = as_mirror(elementary_cup((-1, 1), 1))
    assert last == make_shadow(2, 3, [(1, 1)], [(1, 2)], mirror=True)
    assert right_contractible(last)
    assert not left_contractible(last)


def test_mirror_flag_blocks_mixed_concatenation():
    E = elementary_straight((1, -1))
    with pytest.raises(ValueError):
        compose(E, as_mirror(E))


def test_json_roundtrip():
    rng = random.Random(20240811)
    for _ in range(25):
        P = random_shadow(rng, rng.randint(1, 6), rng.randint(1, 6), rng.random() < 0.5)
        assert shadow_from_json(shadow_to_json(P)) == P


def test_half_slots():
    assert half_slots(1) == frozenset()
    assert half_slots(4) == {1, 2, 3}


def test_random_composable_inv_additivity():
    rng = random.Random(7)
    found = 0
    for _ in range(300):
        P1 = random_shadow(rng, rng.randint(2, 5), rng.randint(2, 5))
        full = half_slots(P1.n)
        sx1 = sorted(P1.xi_sources)
        to1 = sorted(P1.omega_targets)
        xt = rng.sample(sorted(full), len(sx1)) if P1.n > 1 else []
        ot = rng.sample(sorted(full), len(to1)) if P1.n > 1 else []
        try:
            P2 = Shadow(P1.n, P1.n, tuple(zip(xt, sx1)), tuple(zip(to1, ot)))
        except ValueError:
            continue
        if composable(P1, P2):
            found += 1
            c1 = shadow_inv_counts(P1)
            c2 = shadow_inv_counts(P2)
            c = shadow_inv_counts(compose(P1, P2))
            assert c == tuple(c1[i] + c2[i] for i in range(3))
    assert found > 20
