"""Grid blocks, plumbed diagrams, rectangle counts, boundary actions, and
the closed-grid rank table."""

from __future__ import annotations

import random

import pytest

from tanglehfk.gradings import grade_generator, grade_sequence_generator
from tanglehfk.grids import (
    ClosedGrid,
    GridGenerator,
    _rectangles,
    closed_grid_components,
    closed_grid_from_ascii,
    closed_grid_hfk,
    closed_grid_to_ascii,
    enumerate_grid_generators,
    gen_to_grid,
    glue_grids,
    grid_differential,
    grid_from_ascii,
    grid_from_json,
    grid_to_ascii,
    grid_to_gen,
    grid_to_json,
    grid_typeA_action,
    grid_typeD_map,
    self_glue,
    sequence_to_grid,
    shadow_to_grid,
)
from tanglehfk.shadows import (
    Shadow,
    as_mirror,
    elementary_cap,
    elementary_cup,
    elementary_straight,
    left_algebra_shadow,
    make_shadow,
    right_algebra_shadow,
)
from tanglehfk.strands import (
    Generator,
    enumerate_generators,
    codifferential,
    differential,
    gen_elem,
    left_idempotent,
    multiply,
    right_idempotent,
)

from conftest import (
    random_left_contractible,
    random_right_contractible,
    random_shadow,
    random_wedge_extension,
)


def _single_terms(G, x):
    """Differential terms of a one-block diagram as (mono, matching) pairs."""
    return frozenset(
        (mono, grid_to_gen(G, y)[0]) for mono, y in grid_differential(G, x)
    )


def _dsquared(G, x):
    acc: set = set()
    for m1, y in grid_differential(G, x):
        for m2, z in grid_differential(G, y):
            acc ^= {(m1.times(m2), z)}
    return acc


def test_block_marking_positions():
    P = make_shadow(3, 4, [(2, 1)], [(1, 3)])
    G = shadow_to_grid(P)
    assert G.kind == "shadow" and G.width == 3 and G.height == 4
    assert G.Xs == {(-3, 5)}
    assert G.Os == {(-3, 7)}
    Gm = shadow_to_grid(as_mirror(P))
    assert Gm.kind == "mirror"
    assert Gm.Xs == {(3, 5)}
    assert Gm.Os == {(3, 7)}
    assert G.alpha_rows == (1, 2, 3, 4)
    assert G.beta_cols == (1, 2, 3)


def test_boundary_markers_example():
    P = make_shadow(3, 3, [(2, 1)], [(2, 1)])
    G = shadow_to_grid(P)
    xm = {pt for kind, pt in G.boundary_markers if kind == "x"}
    om = {pt for kind, pt in G.boundary_markers if kind == "o"}
    assert xm == {(-5, 0), (0, 3)}
    assert om == {(-3, 0), (0, 5)}
    Gm = shadow_to_grid(as_mirror(P))
    xmm = {pt for kind, pt in Gm.boundary_markers if kind == "x"}
    assert xmm == {(5, 0), (0, 3)}
    straight = shadow_to_grid(elementary_straight((1, -1)))
    sx = {pt for kind, pt in straight.boundary_markers if kind == "x"}
    so = {pt for kind, pt in straight.boundary_markers if kind == "o"}
    assert sx == {(-3, 0), (0, 3)}
    assert so == {(-5, 0), (0, 5)}


def test_generator_enumeration_matches_strands():
    rng = random.Random(11)
    for _ in range(8):
        m, n = rng.randint(1, 4), rng.randint(1, 4)
        P = random_shadow(rng, m, n, mirror=bool(rng.getrandbits(1)))
        G = shadow_to_grid(P)
        via_strands = {gen_to_grid(G, f) for f in enumerate_generators(P)}
        via_grid = set(enumerate_grid_generators(G))
        assert via_strands == via_grid
        for f in enumerate_generators(P):
            assert grid_to_gen(G, gen_to_grid(G, f)) == (f,)


def test_grid_differential_matches_strand_differential():
    rng = random.Random(12)
    for _ in range(14):
        m, n = rng.randint(2, 5), rng.randint(2, 5)
        P = random_shadow(rng, m, n)
        G = shadow_to_grid(P, key=7)
        for f in enumerate_generators(P):
            got = _single_terms(G, gen_to_grid(G, f))
            want = differential(P, gen_elem(f), slice_key=7)
            assert got == want


def test_grid_differential_matches_strand_codifferential():
    rng = random.Random(13)
    for _ in range(14):
        m, n = rng.randint(2, 5), rng.randint(2, 5)
        P = random_shadow(rng, m, n, mirror=True)
        G = shadow_to_grid(P, key=3)
        for f in enumerate_generators(P):
            got = _single_terms(G, gen_to_grid(G, f))
            want = codifferential(P, gen_elem(f), slice_key=3)
            assert got == want


def test_rectangle_grading_identities():
    rng = random.Random(14)
    checked = 0
    for _ in range(12):
        m, n = rng.randint(2, 4), rng.randint(2, 4)
        P = random_shadow(rng, m, n, mirror=bool(rng.getrandbits(1)))
        G = shadow_to_grid(P)
        for f in enumerate_generators(P):
            x = gen_to_grid(G, f)
            gx = grade_generator(P, f)
            for exps, n_x, y in _rectangles(G, x):
                gy = grade_generator(P, grid_to_gen(G, y)[0])
                n_o = sum(exps.values())
                assert gx.alexander2 - gy.alexander2 == 2 * (n_x - n_o)
                if n_x == 0:
                    assert gx.maslov - gy.maslov == 1 - 2 * n_o
                checked += 1
    assert checked > 100


def _matching_algebra_gens(E, rows):
    out = []
    for a in enumerate_generators(E):
        if a.S == rows:
            out.append(a)
    return out


def test_typeA_right_matches_product():
    rng = random.Random(15)
    for _ in range(8):
        m, n = rng.randint(2, 4), rng.randint(2, 4)
        P = random_shadow(rng, m, n)
        E = right_algebra_shadow(P)
        G = shadow_to_grid(P, key=5)
        for f in enumerate_generators(P):
            x = gen_to_grid(G, f)
            for a in _matching_algebra_gens(E, f.T):
                want = multiply(
                    P, gen_elem(f), E, gen_elem(a), key1=5, key2=9, key_out=5
                )
                got = frozenset(
                    (mono, grid_to_gen(G, y)[0])
                    for mono, y in grid_typeA_action(G, x, a, "right")
                )
                assert got == want, (P, f, a)


def test_typeA_left_matches_product():
    rng = random.Random(16)
    for _ in range(8):
        m, n = rng.randint(2, 4), rng.randint(2, 4)
        P = random_shadow(rng, m, n)
        E = left_algebra_shadow(P)
        G = shadow_to_grid(P, key=5)
        for f in enumerate_generators(P):
            x = gen_to_grid(G, f)
            for a in enumerate_generators(E):
                if a.T != f.S:
                    continue
                want = multiply(
                    E, gen_elem(a), P, gen_elem(f), key1=9, key2=5, key_out=5
                )
                got = frozenset(
                    (mono, grid_to_gen(G, y)[0])
                    for mono, y in grid_typeA_action(G, x, a, "left")
                )
                assert got == want, (P, f, a)


def test_typeA_idempotent_action():
    rng = random.Random(17)
    P = random_shadow(rng, 4, 4)
    G = shadow_to_grid(P)
    for f in enumerate_generators(P):
        x = gen_to_grid(G, f)
        right = grid_typeA_action(G, x, right_idempotent(f), "right")
        left = grid_typeA_action(G, x, left_idempotent(f), "left")
        assert {y for _, y in right} == {x}
        assert {y for _, y in left} == {x}
        wrong_rows = frozenset(range(1, P.n + 1)) - f.T
        if wrong_rows != f.T:
            bad = Generator(tuple((u, u) for u in sorted(wrong_rows)))
            assert grid_typeA_action(G, x, bad, "right") == frozenset()


def _iota_left(P, f):
    spare = sorted(frozenset(range(1, P.n + 1)) - f.T)
    return Generator(tuple((u, u) for u in spare))


def _iota_right(P, f):
    spare = sorted(frozenset(range(1, P.m + 1)) - f.S)
    return Generator(tuple((u, u) for u in spare))


def test_typeD_left_matches_glued_differential():
    rng = random.Random(18)
    for _ in range(10):
        m, n = rng.randint(2, 4), rng.randint(2, 4)
        P = random_shadow(rng, m, n, mirror=True)
        EL = left_algebra_shadow(P)
        Gm = shadow_to_grid(P, key=1)
        Gpair = glue_grids(shadow_to_grid(EL, key=0), Gm)
        for f in enumerate_generators(P):
            iota = _iota_left(P, f)
            xg = gen_to_grid(Gpair, (iota, f))
            got = grid_differential(Gpair, xg)
            want: set = set()
            xs = gen_to_grid(Gm, f)
            for mono, y in grid_differential(Gm, xs):
                want ^= {(mono, gen_to_grid(Gpair, (iota, grid_to_gen(Gm, y)[0])))}
            for r, mono, y in grid_typeD_map(Gm, xs, "left", algebra_key=0):
                want ^= {(mono, gen_to_grid(Gpair, (r, grid_to_gen(Gm, y)[0])))}
            assert got == frozenset(want), (P, f)


def test_typeD_right_matches_glued_differential():
    rng = random.Random(19)
    for _ in range(10):
        m, n = rng.randint(2, 4), rng.randint(2, 4)
        P = random_shadow(rng, m, n, mirror=True)
        ER = right_algebra_shadow(P)
        Gm = shadow_to_grid(P, key=1)
        Gpair = glue_grids(Gm, shadow_to_grid(ER, key=2))
        for f in enumerate_generators(P):
            iota = _iota_right(P, f)
            xg = gen_to_grid(Gpair, (f, iota))
            got = grid_differential(Gpair, xg)
            want: set = set()
            xs = gen_to_grid(Gm, f)
            for mono, y in grid_differential(Gm, xs):
                want ^= {(mono, gen_to_grid(Gpair, (grid_to_gen(Gm, y)[0], iota)))}
            for r, mono, y in grid_typeD_map(Gm, xs, "right", algebra_key=2):
                want ^= {(mono, gen_to_grid(Gpair, (grid_to_gen(Gm, y)[0], r)))}
            assert got == frozenset(want), (P, f)


def test_glue_validation_errors():
    P = elementary_straight((1, -1))
    with pytest.raises(ValueError):
        glue_grids(shadow_to_grid(P), shadow_to_grid(P))
    Q = as_mirror(elementary_straight((1, -1)))
    with pytest.raises(ValueError):
        glue_grids(shadow_to_grid(P), shadow_to_grid(Q))
    R = as_mirror(elementary_straight((-1, 1)))
    assert glue_grids(shadow_to_grid(P), shadow_to_grid(R, key=1)).glued_edges == (
        "pair:0-1:rows",
    )
    with pytest.raises(ValueError):
        self_glue(shadow_to_grid(R), "rows")


def test_plumbed_dsquared_random():
    rng = random.Random(20)
    for trial in range(10):
        first = random_shadow(rng, rng.randint(2, 4), rng.randint(2, 4),
                              mirror=bool(rng.getrandbits(1)))
        seq = [first]
        for _ in range(rng.randint(1, 2)):
            seq.append(random_wedge_extension(rng, seq[-1]))
        G = sequence_to_grid(seq)
        gens = enumerate_grid_generators(G)
        rng.shuffle(gens)
        for x in gens[:25]:
            assert not _dsquared(G, x), (seq, x)


def test_self_glued_dsquared_random():
    rng = random.Random(21)
    for _ in range(6):
        n = rng.randint(2, 3)
        P = random_left_contractible(rng, n, n + rng.randint(0, 2))
        G = self_glue(shadow_to_grid(P), "rows")
        for x in enumerate_grid_generators(G):
            assert not _dsquared(G, x)
    for _ in range(6):
        m = rng.randint(2, 3)
        P = random_right_contractible(rng, m, m + rng.randint(0, 2))
        G = self_glue(shadow_to_grid(P), "cols")
        for x in enumerate_grid_generators(G):
            assert not _dsquared(G, x)


def _unknot_sequence():
    d1 = as_mirror(elementary_cap((-1, 1), 1))
    mid = elementary_straight((1, -1))
    cfin = as_mirror(elementary_cup((-1, 1), 1))
    return [d1, mid, cfin]


def test_unknot_sequence_plumbing():
    seq = _unknot_sequence()
    G = sequence_to_grid(seq, close_start=True, close_end=True)
    gens = enumerate_grid_generators(G)
    assert len(gens) == 36
    for x in gens:
        assert not _dsquared(G, x)

    by_grading: dict = {}
    index = {x: i for i, x in enumerate(gens)}
    for x in gens:
        g = grade_sequence_generator(seq, grid_to_gen(G, x))
        by_grading.setdefault((g.maslov, g.alexander2), []).append(x)

    ranks: dict = {}
    levels: dict = {}
    for (mm, a2), xs in by_grading.items():
        levels.setdefault(a2, {})[mm] = xs
    table: dict = {}
    for a2, by_m in levels.items():
        pos = {mm: {index[x]: c for c, x in enumerate(xs)} for mm, xs in by_m.items()}
        rk: dict = {}
        for mm, xs in by_m.items():
            rows = []
            for x in xs:
                row = 0
                for mono, y in grid_differential(G, x):
                    if not mono.is_unit:
                        continue
                    gy = grade_sequence_generator(seq, grid_to_gen(G, y))
                    assert (gy.maslov, gy.alexander2) == (mm - 1, a2)
                    row ^= 1 << pos[mm - 1][index[y]]
                rows.append(row)
            rk[mm] = _f2_rank_local(rows)
        for mm, xs in by_m.items():
            h = len(xs) - rk.get(mm, 0) - rk.get(mm + 1, 0)
            if h:
                table[(mm, a2)] = h
    assert sum(table.values()) == 8
    base = max(table)
    expect = {}
    for dw in (0, 1):
        for dv in (0, 1, 2):
            key = (base[0] - dw - dv, base[1] - 2 * dv)
            expect[key] = expect.get(key, 0) + (1 if dv != 1 else 2)
    assert table == expect


def _f2_rank_local(rows):
    pivots = {}
    rank = 0
    for row in rows:
        while row:
            hb = row.bit_length() - 1
            if hb in pivots:
                row ^= pivots[hb]
            else:
                pivots[hb] = row
                rank += 1
                break
    return rank


def test_closed_unknot():
    G = ClosedGrid((1, 0), (0, 1))
    assert closed_grid_components(G) == 1
    assert closed_grid_hfk(G) == {(0, 0): 1}


def test_closed_trefoil():
    G = ClosedGrid((0, 4, 3, 2, 1), (3, 2, 1, 0, 4))
    assert closed_grid_components(G) == 1
    table = closed_grid_hfk(G)
    assert sum(table.values()) == 3
    assert all(v == 1 for v in table.values())
    for (mm, a2), v in table.items():
        assert table.get((mm - a2, -a2)) == v
    euler = {}
    for (mm, a2), v in table.items():
        euler[a2] = euler.get(a2, 0) + (v if mm % 2 == 0 else -v)
    assert euler == {2: 1, 0: -1, -2: 1}
    assert table == {(0, 2): 1, (-1, 0): 1, (-2, -2): 1}


def test_closed_hopf():
    G = ClosedGrid((0, 3, 2, 1), (2, 1, 0, 3))
    assert closed_grid_components(G) == 2
    table = closed_grid_hfk(G)
    assert sum(table.values()) == 4
    for (mm, a2), v in table.items():
        assert table.get((mm - a2, -a2)) == v
    assert table == {(0, 2): 1, (-1, 0): 2, (-2, -2): 1}


def test_closed_symmetry_random():
    rng = random.Random(22)
    done = 0
    while done < 5:
        x = list(range(4))
        o = list(range(4))
        rng.shuffle(x)
        rng.shuffle(o)
        if any(a == b for a, b in zip(x, o)):
            continue
        G = ClosedGrid(tuple(x), tuple(o))
        table = closed_grid_hfk(G)
        for (mm, a2), v in table.items():
            assert table.get((mm - a2, -a2)) == v, (x, o, table)
        done += 1


def test_ascii_json_roundtrips():
    rng = random.Random(23)
    for _ in range(6):
        P = random_shadow(rng, 3, 4, mirror=bool(rng.getrandbits(1)))
        G = shadow_to_grid(P, key=2)
        text = grid_to_ascii(G)
        back = grid_from_ascii(G.kind, text, key=2)
        assert back.blocks[0] == G.blocks[0]
        assert grid_from_json(grid_to_json(G)) == G
    seq = _unknot_sequence()
    G = sequence_to_grid(seq, close_start=True, close_end=True)
    assert grid_from_json(grid_to_json(G)) == G
    C = ClosedGrid((1, 2, 3, 4, 0), (4, 0, 1, 2, 3))
    assert closed_grid_from_ascii(closed_grid_to_ascii(C)) == C
