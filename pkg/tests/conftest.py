"""Shared helpers: seeded random slices and generator sampling."""

from __future__ import annotations

import random

from tanglehfk.shadows import Shadow


def random_shadow(rng: random.Random, m: int, n: int, mirror: bool = False) -> Shadow:
    """A random valid slice with the given boundary sizes."""
    a = list(range(1, n))
    b = list(range(1, m))
    kx = rng.randint(0, min(len(a), len(b)))
    ko = rng.randint(0, min(len(a), len(b)))
    xs = rng.sample(a, kx)
    xt = rng.sample(b, kx)
    rng.shuffle(xt)
    os_ = rng.sample(b, ko)
    ot = rng.sample(a, ko)
    rng.shuffle(ot)
    xi = tuple(zip(xs, xt))
    omega = tuple(zip(os_, ot))
    return Shadow(m, n, xi, omega, mirror)


def random_straightlike(rng: random.Random, size: int) -> Shadow:
    """A random idempotent slice (identity segments on disjoint slot sets)."""
    slots = list(range(1, size))
    rng.shuffle(slots)
    cut1 = rng.randint(0, len(slots))
    cut2 = rng.randint(cut1, len(slots))
    xs = slots[:cut1]
    os_ = slots[cut1:cut2]
    xi = tuple((j, j) for j in sorted(xs))
    omega = tuple((j, j) for j in sorted(os_))
    return Shadow(size, size, xi, omega, False)


def random_wedge_extension(rng: random.Random, P: Shadow) -> Shadow:
    """A random slice of the opposite kind that glues onto P's free end."""
    if P.mirror:
        xt = sorted(set(range(1, P.m)) - P.xi_targets)
        os_ = sorted(set(range(1, P.m)) - P.omega_sources)
        n2 = max(len(xt), len(os_), 1) + 1 + rng.randint(0, 1)
        xs = rng.sample(range(1, n2), len(xt))
        ot = rng.sample(range(1, n2), len(os_))
        rng.shuffle(xt)
        rng.shuffle(os_)
        return Shadow(P.m, n2, tuple(zip(xs, xt)), tuple(zip(os_, ot)), False)
    xs = sorted(set(range(1, P.n)) - P.xi_sources)
    ot = sorted(set(range(1, P.n)) - P.omega_targets)
    m2 = max(len(xs), len(ot), 1) + 1 + rng.randint(0, 1)
    xt = rng.sample(range(1, m2), len(xs))
    os_ = rng.sample(range(1, m2), len(ot))
    rng.shuffle(xs)
    rng.shuffle(ot)
    return Shadow(m2, P.n, tuple(zip(xs, xt)), tuple(zip(os_, ot)), True)


def random_left_contractible(rng: random.Random, n: int, m: int) -> Shadow:
    """A random mirror slice whose drawn-left line is all turns."""
    assert m >= n
    xt = rng.sample(range(1, m), n - 1)
    os_ = rng.sample(range(1, m), n - 1)
    xi = tuple(zip(range(1, n), xt))
    omega = tuple(zip(os_, range(1, n)))
    return Shadow(m, n, xi, omega, True)


def random_right_contractible(rng: random.Random, m: int, n: int) -> Shadow:
    """A random mirror slice whose drawn-right line is all turns."""
    assert n >= m
    xs = rng.sample(range(1, n), m - 1)
    ot = rng.sample(range(1, n), m - 1)
    xi = tuple(zip(xs, range(1, m)))
    omega = tuple(zip(range(1, m), ot))
    return Shadow(m, n, xi, omega, True)
