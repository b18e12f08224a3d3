"""Wedge products of alternating slice sequences and their typed structures.

Conventions
-----------
A wedge sequence lists slices left to right, strictly alternating between
plain and mirrored.  Consecutive slices share one boundary line: a mirror
followed by a plain slice shares its left-height line, a plain slice
followed by a mirror shares its right-height line.  On the shared line the
x-segment endpoint sets of the two slices are complementary, as are the
o-segment endpoint sets.  A generator of the sequence is a tuple of slice
generators whose occupied heights on each shared line are complementary.

The differential adds three kinds of terms: slice-internal ones (the
differential on plain slices, the codifferential on mirrored ones), mixed
ones that exchange the endpoints of two strands meeting one shared line,
and wrap terms on contracted ends.  A mixed exchange never picks up a
crossing with a strand or x-segment of the mirrored slice and never loses
one on the plain slice; crossing changes against o-segments are recorded
as U-powers, keyed (slice index, o-slot).  A same-slice exchange resolves
a strand crossing on the mirrored slice and creates one on the plain
slice, opposite to the slice-internal maps.

A mirrored end slice whose outer line is all turns may be contracted: the
differential gains wrap terms that resolve one strand crossing through
the closed line, defined only on generators occupying that line fully.

Structures built from a sequence expose, on each non-contracted side,
either algebra output terms (mirrored end: computed by wedging the
matching idempotent slice onto that end, with algebra U-keys -1 on the
left and -2 on the right) or a single-input algebra action (plain end:
computed by slice concatenation).  All maps with more than one algebra
input vanish identically, so the structure identities are differential
bimodule identities.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .gradings import Bigrading, grade_sequence_generator
from .shadows import (
    Shadow,
    left_algebra_shadow,
    left_contractible,
    right_algebra_shadow,
    right_contractible,
    wedge_compatible,
)
from .strands import (
    Element,
    Generator,
    StrandAlgebra,
    UMonomial,
    codifferential,
    differential,
    enumerate_generators,
    gen_elem,
    idempotent_gen,
    multiply,
    slice_segments,
)

LEFT_ALGEBRA_KEY = -1
RIGHT_ALGEBRA_KEY = -2


def _crosses(a, b) -> bool:
    return (a[0] - b[0]) * (a[1] - b[1]) < 0


def tensor_nonzero(P1: Shadow, f1: Generator, P2: Shadow, f2: Generator) -> bool:
    """True when the generators occupy the shared line complementarily."""
    if P1.mirror:
        ground = frozenset(range(1, P1.m + 1))
        return not (f1.S & f2.S) and f1.S | f2.S == ground
    ground = frozenset(range(1, P1.n + 1))
    return not (f1.T & f2.T) and f1.T | f2.T == ground


def _swap_targets(f: Generator, p: int, q: int) -> Generator:
    phi = f.phi
    tp, tq = phi[p], phi[q]
    phi[p], phi[q] = tq, tp
    return Generator(tuple(phi.items()))


def _mixed_left_line(P1: Shadow, f1: Generator, P2: Shadow, f2: Generator, key1, key2):
    """Exchanges on the left-height line shared by a mirror and a plain slice."""
    st1 = {s: (2 * s, 2 * t) for s, t in f1.pairs}
    st2 = {s: (2 * s, 2 * t) for s, t in f2.pairs}
    _, x1, o1_by = slice_segments(P1)
    _, x2, o2_by = slice_segments(P2)

    # trade one endpoint across the line
    for p, q in itertools.product(st1, st2):
        c1b, c1a = st1[p], (2 * q, st1[p][1])
        c2b, c2a = st2[q], (2 * p, st2[q][1])
        fixed1 = [seg for s, seg in st1.items() if s != p] + list(x1)
        fixed2 = [seg for s, seg in st2.items() if s != q] + list(x2)
        if any(_crosses(c1a, seg) and not _crosses(c1b, seg) for seg in fixed1):
            continue
        if any(_crosses(c2b, seg) and not _crosses(c2a, seg) for seg in fixed2):
            continue
        exps = [
            ((key1, s_o), 1)
            for s_o, seg in o1_by.items()
            if _crosses(c1a, seg) and not _crosses(c1b, seg)
        ] + [
            ((key2, s_o), 1)
            for s_o, seg in o2_by.items()
            if _crosses(c2b, seg) and not _crosses(c2a, seg)
        ]
        g1 = Generator(tuple((q if s == p else s, t) for s, t in f1.pairs))
        g2 = Generator(tuple((p if s == q else s, t) for s, t in f2.pairs))
        yield UMonomial(tuple(exps)), g1, g2

    # resolve a crossing of the mirrored slice through the line
    for (p, tp), (q, tq) in itertools.combinations(f1.pairs, 2):
        if tp < tq:
            continue
        lo, hi, tlo, thi = 2 * p, 2 * q, 2 * tq, 2 * tp
        if any(lo < l < hi for l, _ in list(st2.values()) + list(x2)):
            continue
        if any(
            lo < l < hi and not tlo < r < thi
            for s, (l, r) in st1.items()
            if s not in (p, q)
        ):
            continue
        if any(lo < l < hi and not tlo < r < thi for l, r in x1):
            continue
        exps = [
            ((key1, s_o), 1)
            for s_o, (l, r) in o1_by.items()
            if lo < l < hi and not tlo < r < thi
        ] + [((key2, s_o), 1) for s_o, (l, _) in o2_by.items() if lo < l < hi]
        yield UMonomial(tuple(exps)), _swap_targets(f1, p, q), f2

    # create a crossing on the plain slice through the line
    for (p, tp), (q, tq) in itertools.combinations(f2.pairs, 2):
        if tp > tq:
            continue
        lo, hi, tlo, thi = 2 * p, 2 * q, 2 * tp, 2 * tq
        if any(lo < l < hi for l, _ in list(st1.values()) + list(x1)):
            continue
        if any(
            lo < l < hi and not tlo < r < thi
            for s, (l, r) in st2.items()
            if s not in (p, q)
        ):
            continue
        if any(lo < l < hi and not tlo < r < thi for l, r in x2):
            continue
        exps = [((key1, s_o), 1) for s_o, (l, _) in o1_by.items() if lo < l < hi] + [
            ((key2, s_o), 1)
            for s_o, (l, r) in o2_by.items()
            if lo < l < hi and not tlo < r < thi
        ]
        yield UMonomial(tuple(exps)), f1, _swap_targets(f2, p, q)


def _mixed_right_line(P1: Shadow, f1: Generator, P2: Shadow, f2: Generator, key1, key2):
    """Exchanges on the right-height line shared by a plain and a mirror slice."""
    t1 = {t: (2 * s, 2 * t) for s, t in f1.pairs}
    t2 = {t: (2 * s, 2 * t) for s, t in f2.pairs}
    _, x1, o1_by = slice_segments(P1)
    _, x2, o2_by = slice_segments(P2)
    o1 = {s_o: seg for s_o, seg in o1_by.items()}
    o2 = {s_o: seg for s_o, seg in o2_by.items()}

    # trade one endpoint across the line
    for p, q in itertools.product(t1, t2):
        c1b, c1a = t1[p], (t1[p][0], 2 * q)
        c2b, c2a = t2[q], (t2[q][0], 2 * p)
        fixed1 = [seg for t, seg in t1.items() if t != p] + list(x1)
        fixed2 = [seg for t, seg in t2.items() if t != q] + list(x2)
        if any(_crosses(c1b, seg) and not _crosses(c1a, seg) for seg in fixed1):
            continue
        if any(_crosses(c2a, seg) and not _crosses(c2b, seg) for seg in fixed2):
            continue
        exps = [
            ((key1, s_o), 1)
            for s_o, seg in o1.items()
            if _crosses(c1b, seg) and not _crosses(c1a, seg)
        ] + [
            ((key2, s_o), 1)
            for s_o, seg in o2.items()
            if _crosses(c2a, seg) and not _crosses(c2b, seg)
        ]
        g1 = Generator(tuple((s, q if t == p else t) for s, t in f1.pairs))
        g2 = Generator(tuple((s, p if t == q else t) for s, t in f2.pairs))
        yield UMonomial(tuple(exps)), g1, g2

    # create a crossing on the plain slice through the line
    for (u, p), (v, q) in itertools.combinations(sorted(f1.pairs, key=lambda pr: pr[1]), 2):
        if u > v:
            continue
        lo, hi, slo, shi = 2 * p, 2 * q, 2 * u, 2 * v
        if any(lo < r < hi for _, r in list(t2.values()) + list(x2)):
            continue
        if any(
            lo < r < hi and not slo < l < shi
            for t, (l, r) in t1.items()
            if t not in (p, q)
        ):
            continue
        if any(lo < r < hi and not slo < l < shi for l, r in x1):
            continue
        exps = [
            ((key1, s_o), 1)
            for s_o, (l, r) in o1.items()
            if lo < r < hi and not slo < l < shi
        ] + [((key2, s_o), 1) for s_o, (_, r) in o2.items() if lo < r < hi]
        yield UMonomial(tuple(exps)), _swap_targets(f1, u, v), f2

    # resolve a crossing of the mirrored slice through the line
    for (u, p), (v, q) in itertools.combinations(sorted(f2.pairs, key=lambda pr: pr[1]), 2):
        if u < v:
            continue
        lo, hi, slo, shi = 2 * p, 2 * q, 2 * v, 2 * u
        if any(lo < r < hi for _, r in list(t1.values()) + list(x1)):
            continue
        if any(
            lo < r < hi and not slo < l < shi
            for t, (l, r) in t2.items()
            if t not in (p, q)
        ):
            continue
        if any(lo < r < hi and not slo < l < shi for l, r in x2):
            continue
        exps = [((key1, s_o), 1) for s_o, (_, r) in o1.items() if lo < r < hi] + [
            ((key2, s_o), 1)
            for s_o, (l, r) in o2.items()
            if lo < r < hi and not slo < l < shi
        ]
        yield UMonomial(tuple(exps)), f1, _swap_targets(f2, u, v)


def mixed_differential(
    P1: Shadow,
    f1: Generator,
    P2: Shadow,
    f2: Generator,
    *,
    key1: int = 0,
    key2: int = 1,
    keep_u: bool = True,
) -> frozenset:
    """Exchange terms across the shared line, as (monomial, (g1, g2)) pairs."""
    if not wedge_compatible(P1, P2):
        raise ValueError("slices do not form a wedge")
    if not tensor_nonzero(P1, f1, P2, f2):
        raise ValueError("generators do not occupy the shared line complementarily")
    rule = _mixed_left_line if P1.mirror else _mixed_right_line
    out: set = set()
    for mono, g1, g2 in rule(P1, f1, P2, f2, key1, key2):
        if not keep_u and not mono.is_unit:
            continue
        out ^= {(mono, (g1, g2))}
    return frozenset(out)


def contract_differential(
    P: Shadow,
    side: str,
    x: Element,
    *,
    slice_key: int = 0,
    keep_u: bool = True,
) -> Element:
    """Wrap terms that resolve one crossing through a contracted outer line."""
    if side == "left":
        if not left_contractible(P):
            raise ValueError("left line is not contractible")
    elif side == "right":
        if not right_contractible(P):
            raise ValueError("right line is not contractible")
    else:
        raise ValueError("side must be left or right")
    xi = dict(P.xi)
    xi_inv = {t: s for s, t in P.xi}
    out: set = set()
    for mono, f in x:
        if side == "left" and len(f.pairs) != P.n:
            raise ValueError("left contraction needs every right height occupied")
        if side == "right" and len(f.pairs) != P.m:
            raise ValueError("right contraction needs every left height occupied")
        for (s1, t1), (s2, t2) in itertools.combinations(f.pairs, 2):
            if t1 < t2:
                continue
            if side == "left":
                # the wrap corridor spans right heights (t2, t1)
                if any(
                    2 * t2 < 2 * t < 2 * t1 and not s1 < s < s2 for s, t in f.pairs
                ):
                    continue
                if any(
                    2 * t2 < 2 * h + 1 < 2 * t1 and not 2 * s1 < 2 * xi[h] + 1 < 2 * s2
                    for h in xi
                ):
                    continue
                exps = [
                    ((slice_key, s_o), 1)
                    for s_o, t_o in P.omega
                    if 2 * t2 < 2 * t_o + 1 < 2 * t1
                    and not 2 * s1 < 2 * s_o + 1 < 2 * s2
                ]
            else:
                # the wrap corridor spans left heights (s1, s2)
                if any(
                    2 * s1 < 2 * s < 2 * s2 and not t2 < t < t1 for s, t in f.pairs
                ):
                    continue
                if any(
                    2 * s1 < 2 * h + 1 < 2 * s2
                    and not 2 * t2 < 2 * xi_inv[h] + 1 < 2 * t1
                    for h in xi_inv
                ):
                    continue
                exps = [
                    ((slice_key, s_o), 1)
                    for s_o, t_o in P.omega
                    if 2 * s1 < 2 * s_o + 1 < 2 * s2
                    and not 2 * t2 < 2 * t_o + 1 < 2 * t1
                ]
            new_mono = mono.times(UMonomial(tuple(exps)))
            if not keep_u and not new_mono.is_unit:
                continue
            out ^= {(new_mono, _swap_targets(f, s1, s2))}
    return frozenset(out)


@dataclass(frozen=True)
class WedgeSequence:
    """Alternating slices with optional contracted ends."""

    slices: tuple[Shadow, ...]
    contract_left: bool = False
    contract_right: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "slices", tuple(self.slices))
        if not self.slices:
            raise ValueError("a wedge sequence needs at least one slice")
        for P, Q in zip(self.slices, self.slices[1:]):
            if not wedge_compatible(P, Q):
                raise ValueError("consecutive slices do not form a wedge")
        if self.contract_left and not left_contractible(self.slices[0]):
            raise ValueError("first slice is not left-contractible")
        if self.contract_right and not right_contractible(self.slices[-1]):
            raise ValueError("last slice is not right-contractible")

    @property
    def left_kind(self) -> str:
        if self.contract_left:
            return "none"
        return "D" if self.slices[0].mirror else "A"

    @property
    def right_kind(self) -> str:
        if self.contract_right:
            return "none"
        return "D" if self.slices[-1].mirror else "A"


def _matchings(S_set, T_set) -> list[Generator]:
    if len(S_set) != len(T_set):
        return []
    lefts = sorted(S_set)
    return [
        Generator(tuple(zip(lefts, word)))
        for word in itertools.permutations(sorted(T_set))
    ]


def _slice_gens(P: Shadow, S_fixed=None, T_fixed=None) -> list[Generator]:
    if S_fixed is not None and T_fixed is not None:
        return _matchings(S_fixed, T_fixed)
    if S_fixed is not None:
        k = len(S_fixed)
        if k > P.n:
            return []
        return [
            g
            for T in itertools.combinations(range(1, P.n + 1), k)
            for g in _matchings(S_fixed, T)
        ]
    if T_fixed is not None:
        k = len(T_fixed)
        if k > P.m:
            return []
        return [
            g
            for S in itertools.combinations(range(1, P.m + 1), k)
            for g in _matchings(S, T_fixed)
        ]
    return list(enumerate_generators(P))


def enumerate_sequence_generators(seq: WedgeSequence) -> list[tuple[Generator, ...]]:
    """Generator tuples, complementary on shared lines, full on contracted ends."""
    slices = seq.slices
    out: list[tuple[Generator, ...]] = []

    def constraints(idx: int, prev: Generator | None):
        S_fixed = T_fixed = None
        P = slices[idx]
        if idx > 0:
            left = slices[idx - 1]
            if left.mirror:
                S_fixed = frozenset(range(1, left.m + 1)) - prev.S
            else:
                T_fixed = frozenset(range(1, left.n + 1)) - prev.T
        if idx == 0 and seq.contract_left:
            T_fixed = frozenset(range(1, P.n + 1))
        if idx == len(slices) - 1 and seq.contract_right:
            S_fixed = frozenset(range(1, P.m + 1))
        return S_fixed, T_fixed

    def extend(idx: int, prefix: list[Generator]) -> None:
        if idx == len(slices):
            out.append(tuple(prefix))
            return
        S_fixed, T_fixed = constraints(idx, prefix[-1] if prefix else None)
        for g in _slice_gens(slices[idx], S_fixed, T_fixed):
            prefix.append(g)
            extend(idx + 1, prefix)
            prefix.pop()

    extend(0, [])
    return out


def wedge_differential(seq: WedgeSequence, x: Element, *, keep_u: bool = True) -> Element:
    """Slice-internal, mixed, and contracted-end terms on tuple elements."""
    slices = seq.slices
    out: set = set()
    for mono, gt in x:
        for j, P in enumerate(slices):
            e = gen_elem(gt[j], mono)
            if P.mirror:
                inner = codifferential(P, e, keep_u=keep_u, slice_key=j)
            else:
                inner = differential(P, e, keep_u=keep_u, slice_key=j)
            if j == 0 and seq.contract_left:
                inner = inner ^ contract_differential(
                    P, "left", e, slice_key=j, keep_u=keep_u
                )
            if j == len(slices) - 1 and seq.contract_right:
                inner = inner ^ contract_differential(
                    P, "right", e, slice_key=j, keep_u=keep_u
                )
            for m2, g2 in inner:
                out ^= {(m2, gt[:j] + (g2,) + gt[j + 1 :])}
        for j in range(len(slices) - 1):
            mixed = mixed_differential(
                slices[j], gt[j], slices[j + 1], gt[j + 1],
                key1=j, key2=j + 1, keep_u=keep_u,
            )
            for m2, (a, b) in mixed:
                m3 = mono.times(m2)
                if not keep_u and not m3.is_unit:
                    continue
                out ^= {(m3, gt[:j] + (a, b) + gt[j + 2 :])}
    return frozenset(out)


def boundary_idempotent(P: Shadow, f: Generator, side: str) -> Generator:
    """Idempotent matching on the drawn-left or drawn-right line of f."""
    if side not in ("left", "right"):
        raise ValueError("side must be left or right")
    if P.mirror:
        if side == "left":
            return idempotent_gen(frozenset(range(1, P.n + 1)) - f.T)
        return idempotent_gen(frozenset(range(1, P.m + 1)) - f.S)
    return idempotent_gen(f.S if side == "left" else f.T)


@dataclass(frozen=True, eq=False)
class StrandStructure:
    """A typed structure built from a wedge sequence.

    delta maps each generator tuple to terms (left algebra output, monomial,
    target tuple, right algebra output); the algebra slot is None on a side
    of kind A or none, and carries the source's boundary idempotent on
    slice-internal terms of a D side.  Algebra actions of A sides are the
    act_left / act_right methods; higher actions vanish.
    """

    seq: WedgeSequence
    left_algebra: StrandAlgebra | None
    right_algebra: StrandAlgebra | None
    generators: tuple[tuple[Generator, ...], ...]
    idempotents: dict
    gradings: dict
    delta: dict
    keep_u: bool

    @property
    def left_kind(self) -> str:
        return self.seq.left_kind

    @property
    def right_kind(self) -> str:
        return self.seq.right_kind

    def act_left(self, a, gt: tuple[Generator, ...]) -> Element:
        """Left action of an algebra generator or element on one tuple.

        Monomials of an element argument must be keyed at the left algebra
        key; the product folds them into the first slice's keys.
        """
        if self.left_kind != "A":
            raise ValueError("structure has no left action")
        P = self.seq.slices[0]
        x = gen_elem(a) if isinstance(a, Generator) else a
        prod = multiply(
            self.left_algebra.shadow,
            x,
            P,
            gen_elem(gt[0]),
            key1=LEFT_ALGEBRA_KEY,
            key2=0,
            key_out=0,
            keep_u=self.keep_u,
        )
        return frozenset((m, (g,) + gt[1:]) for m, g in prod)

    def act_right(self, gt: tuple[Generator, ...], a) -> Element:
        """Right action of an algebra generator or element on one tuple.

        Monomials of an element argument must be keyed at the right algebra
        key; the product folds them into the last slice's keys.
        """
        if self.right_kind != "A":
            raise ValueError("structure has no right action")
        P = self.seq.slices[-1]
        last = len(self.seq.slices) - 1
        x = gen_elem(a) if isinstance(a, Generator) else a
        prod = multiply(
            P,
            gen_elem(gt[-1]),
            self.right_algebra.shadow,
            x,
            key1=last,
            key2=RIGHT_ALGEBRA_KEY,
            key_out=last,
            keep_u=self.keep_u,
        )
        return frozenset((m, gt[:-1] + (g,)) for m, g in prod)


def build_structure(seq: WedgeSequence, *, keep_u: bool = True) -> StrandStructure:
    """Assemble generators, gradings, and the full delta of the sequence."""
    slices = seq.slices
    last = len(slices) - 1
    left_alg = (
        StrandAlgebra(left_algebra_shadow(slices[0]), LEFT_ALGEBRA_KEY)
        if seq.left_kind != "none"
        else None
    )
    right_alg = (
        StrandAlgebra(right_algebra_shadow(slices[-1]), RIGHT_ALGEBRA_KEY)
        if seq.right_kind != "none"
        else None
    )
    gens = tuple(enumerate_sequence_generators(seq))
    idempotents = {}
    gradings = {}
    delta = {}
    for gt in gens:
        li = (
            boundary_idempotent(slices[0], gt[0], "left")
            if seq.left_kind != "none"
            else None
        )
        ri = (
            boundary_idempotent(slices[-1], gt[-1], "right")
            if seq.right_kind != "none"
            else None
        )
        idempotents[gt] = (li, ri)
        gradings[gt] = grade_sequence_generator(slices, gt)
        lslot = li if seq.left_kind == "D" else None
        rslot = ri if seq.right_kind == "D" else None
        terms: set = set()
        for mono, gt2 in wedge_differential(seq, gen_elem(gt), keep_u=keep_u):
            terms ^= {(lslot, mono, gt2, rslot)}
        if seq.left_kind == "D":
            for mono, (a, g0) in mixed_differential(
                left_alg.shadow, li, slices[0], gt[0],
                key1=LEFT_ALGEBRA_KEY, key2=0, keep_u=keep_u,
            ):
                terms ^= {(a, mono, (g0,) + gt[1:], rslot)}
        if seq.right_kind == "D":
            for mono, (gl, b) in mixed_differential(
                slices[-1], gt[-1], right_alg.shadow, ri,
                key1=last, key2=RIGHT_ALGEBRA_KEY, keep_u=keep_u,
            ):
                terms ^= {(lslot, mono, gt[:last] + (gl,), b)}
        delta[gt] = frozenset(terms)
    return StrandStructure(
        seq=seq,
        left_algebra=left_alg,
        right_algebra=right_alg,
        generators=gens,
        idempotents=idempotents,
        gradings=gradings,
        delta=delta,
        keep_u=keep_u,
    )


def structure_to_json(st: StrandStructure) -> dict:
    """Plain-JSON dump: generators with idempotents, gradings, delta terms."""

    def gen_json(g):
        return [list(p) for p in g.pairs] if g is not None else None

    def mono_json(m: UMonomial):
        return [[list(k), e] for k, e in m.exps]

    return {
        "slices": [
            {
                "m": P.m,
                "n": P.n,
                "xi": [list(p) for p in P.xi],
                "omega": [list(p) for p in P.omega],
                "mirror": P.mirror,
            }
            for P in st.seq.slices
        ],
        "contract_left": st.seq.contract_left,
        "contract_right": st.seq.contract_right,
        "left_kind": st.left_kind,
        "right_kind": st.right_kind,
        "keep_u": st.keep_u,
        "generators": [
            {
                "tuple": [gen_json(g) for g in gt],
                "left_idempotent": gen_json(st.idempotents[gt][0]),
                "right_idempotent": gen_json(st.idempotents[gt][1]),
                "maslov": st.gradings[gt].maslov,
                "alexander2": st.gradings[gt].alexander2,
                "delta": sorted(
                    [
                        gen_json(l),
                        mono_json(m),
                        [gen_json(g) for g in gt2],
                        gen_json(r),
                    ]
                    for l, m, gt2, r in st.delta[gt]
                ),
            }
            for gt in st.generators
        ],
    }
