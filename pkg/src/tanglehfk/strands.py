"""Generators and strand elements of a slice, with differential and product.

Conventions
-----------
A generator of a slice with sizes (m, n) is a partial matching: a set S of
left integer heights, a set T of right integer heights, and a bijection
phi from S to T, stored as the sorted tuple of (s, phi(s)) pairs.  Each
pair is a straight strand from left height s to right height phi(s).

Crossing counts use doubled coordinates: integer height h counts as 2h and
slot j (height j + 1/2) as 2j + 1, so two segments cross exactly when
their endpoint differences have opposite signs, with no ties possible.

Coefficients live over GF(2).  An Element is a frozenset of terms; a term
is (UMonomial, payload); addition is symmetric difference.  U-variables
are keyed by (slice key, o-slot), so elements of different slices in a
sequence share one exponent namespace.

The differential of a plain slice resolves one strand crossing at a time,
keeping the total crossing count with x-segments constant; each o-segment
whose crossing count with the strands drops by 2r contributes U^r.  On a
mirror slice the codifferential instead introduces one strand crossing,
and o-segment exponents count crossings gained.  The product concatenates
matchings when strand and x-segment crossing counts add, with o-segment
exponents balancing the factors against the concatenation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .shadows import Shadow, compose, composable, is_idempotent


@dataclass(frozen=True, order=True)
class Generator:
    """A partial matching, as (left, right) height pairs sorted by left."""

    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        pairs = tuple(sorted((int(s), int(t)) for s, t in self.pairs))
        object.__setattr__(self, "pairs", pairs)
        lefts = [s for s, _ in pairs]
        rights = [t for _, t in pairs]
        if len(set(lefts)) != len(lefts) or len(set(rights)) != len(rights):
            raise ValueError("matching endpoints must be distinct")

    @property
    def S(self) -> frozenset[int]:
        return frozenset(s for s, _ in self.pairs)

    @property
    def T(self) -> frozenset[int]:
        return frozenset(t for _, t in self.pairs)

    @property
    def phi(self) -> dict[int, int]:
        return dict(self.pairs)

    @property
    def k(self) -> int:
        return len(self.pairs)

    def is_idempotent(self) -> bool:
        return all(s == t for s, t in self.pairs)


def idempotent_gen(heights) -> Generator:
    """The matching fixing each height in the given set."""
    return Generator(tuple((s, s) for s in sorted(heights)))


def left_idempotent(f: Generator) -> Generator:
    """The idempotent matching on the left endpoint set of f."""
    return idempotent_gen(f.S)


def right_idempotent(f: Generator) -> Generator:
    """The idempotent matching on the right endpoint set of f."""
    return idempotent_gen(f.T)


@dataclass(frozen=True, order=True)
class UMonomial:
    """A monomial in the U-variables, keyed by (slice key, o-slot)."""

    exps: tuple[tuple[tuple[int, int], int], ...] = ()

    def __post_init__(self) -> None:
        merged: dict[tuple[int, int], int] = {}
        for key, e in self.exps:
            e = int(e)
            if e < 0:
                raise ValueError("U exponents must be non-negative")
            if e:
                kk = (int(key[0]), int(key[1]))
                merged[kk] = merged.get(kk, 0) + e
        object.__setattr__(self, "exps", tuple(sorted(merged.items())))

    @property
    def is_unit(self) -> bool:
        return not self.exps

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.exps)

    def times(self, other: "UMonomial") -> "UMonomial":
        if not other.exps:
            return self
        if not self.exps:
            return other
        return UMonomial(self.exps + other.exps)

    def rekey(self, table: dict) -> "UMonomial":
        """Translate keys through the table; missing keys pass through."""
        return UMonomial(tuple((table.get(key, key), e) for key, e in self.exps))


UNIT = UMonomial()

ZERO: frozenset = frozenset()

Element = frozenset


def gen_elem(gen, mono: UMonomial = UNIT) -> Element:
    """The single-term element mono * gen."""
    return frozenset(((mono, gen),))


def add(*elements) -> Element:
    """GF(2) sum of elements (symmetric difference of term sets)."""
    out: set = set()
    for e in elements:
        out ^= set(e)
    return frozenset(out)


def times_mono(x: Element, mono: UMonomial) -> Element:
    """Multiply every term of x by a fixed monomial."""
    if mono.is_unit:
        return frozenset(x)
    return frozenset((m.times(mono), g) for m, g in x)


def tilde_part(x: Element) -> Element:
    """The terms of x carrying no U-variables."""
    return frozenset((m, g) for m, g in x if m.is_unit)


def enumerate_generators(P: Shadow, k: int | None = None) -> list[Generator]:
    """All matchings of the slice, ordered by (size, S, T, image word)."""
    top = min(P.m, P.n)
    if k is None:
        sizes = range(top + 1)
    else:
        if not 0 <= k <= top:
            raise ValueError(f"matching size {k} outside 0..{top}")
        sizes = range(k, k + 1)
    out = []
    for kk in sizes:
        for S in itertools.combinations(range(1, P.m + 1), kk):
            for T in itertools.combinations(range(1, P.n + 1), kk):
                for word in itertools.permutations(T):
                    out.append(Generator(tuple(zip(S, word))))
    return out


@lru_cache(maxsize=None)
def slice_segments(P: Shadow):
    """(o-segments, reversed x-segments, o-segment per slot), doubled coords."""
    o = tuple((2 * s + 1, 2 * t + 1) for s, t in P.omega)
    x = tuple((2 * t + 1, 2 * s + 1) for s, t in P.xi)
    o_by = {s: (2 * s + 1, 2 * t + 1) for s, t in P.omega}
    return o, x, o_by


def strand_segments(f: Generator) -> tuple[tuple[int, int], ...]:
    """The matching strands in doubled coordinates."""
    return tuple((2 * s, 2 * t) for s, t in f.pairs)


def cross_one(seg, segs) -> int:
    """Crossings of one segment with a family."""
    l, r = seg
    return sum(1 for l2, r2 in segs if (l - l2) * (r - r2) < 0)


def cross_many(segs_a, segs_b) -> int:
    """Total crossings between two families."""
    return sum(cross_one(s, segs_b) for s in segs_a)


def self_cross(segs) -> int:
    """Crossings within one family."""
    return sum(
        1
        for i in range(len(segs))
        for j in range(i + 1, len(segs))
        if (segs[i][0] - segs[j][0]) * (segs[i][1] - segs[j][1]) < 0
    )


@dataclass(frozen=True)
class InvCounts:
    """Crossing counts of a matching against itself and the slice segments."""

    inv_phi: int
    inv_phi_xi_inv: int
    inv_phi_omega: int
    inv_omega: int
    inv_xi_inv: int
    per_sO: dict


def inv_counts(P: Shadow, f: Generator) -> InvCounts:
    """All crossing counts used by differentials, products, and gradings."""
    st = strand_segments(f)
    o, x, o_by = slice_segments(P)
    per = {s: cross_one(seg, st) for s, seg in o_by.items()}
    return InvCounts(
        inv_phi=self_cross(st),
        inv_phi_xi_inv=cross_many(st, x),
        inv_phi_omega=sum(per.values()),
        inv_omega=self_cross(o),
        inv_xi_inv=self_cross(x),
        per_sO=per,
    )


def _o_exponents(o_by, st, nst, gained: bool) -> list:
    """Per-slot halved crossing changes of o-segments.

    Raises when a change is odd or would give a negative exponent: both
    indicate a broken resolution, never valid input.
    """
    exps = []
    for s_slot, seg in o_by.items():
        d = cross_one(seg, st) - cross_one(seg, nst)
        if gained:
            d = -d
        if d % 2:
            raise ArithmeticError("odd o-segment crossing change")
        if d < 0:
            raise ArithmeticError("negative U exponent")
        if d:
            exps.append((s_slot, d // 2))
    return exps


def _resolutions(P: Shadow, x: Element, introduce: bool, keep_u: bool, slice_key: int) -> Element:
    o, xsegs, o_by = slice_segments(P)
    out: set = set()
    for mono, f in x:
        st = strand_segments(f)
        base_x = cross_many(st, xsegs)
        base_self = self_cross(st)
        pairs = f.pairs
        kk = len(pairs)
        for i in range(kk):
            for j in range(i + 1, kk):
                inverted = pairs[i][1] > pairs[j][1]
                if inverted == introduce:
                    continue
                new_pairs = list(pairs)
                new_pairs[i] = (pairs[i][0], pairs[j][1])
                new_pairs[j] = (pairs[j][0], pairs[i][1])
                nst = tuple((2 * s, 2 * t) for s, t in new_pairs)
                want = base_self + 1 if introduce else base_self - 1
                if self_cross(nst) != want:
                    continue
                if cross_many(nst, xsegs) != base_x:
                    continue
                exps = _o_exponents(o_by, st, nst, gained=introduce)
                new_mono = mono.times(
                    UMonomial(tuple(((slice_key, s), e) for s, e in exps))
                )
                if not keep_u and not new_mono.is_unit:
                    continue
                out ^= {(new_mono, Generator(tuple(new_pairs)))}
    return frozenset(out)


def differential(P: Shadow, x: Element, *, keep_u: bool = True, slice_key: int = 0) -> Element:
    """Resolve one strand crossing in every way keeping x-segment counts."""
    if P.mirror:
        raise ValueError("differential applies to plain slices; use codifferential")
    return _resolutions(P, x, introduce=False, keep_u=keep_u, slice_key=slice_key)


def codifferential(P: Shadow, x: Element, *, keep_u: bool = True, slice_key: int = 0) -> Element:
    """Introduce one strand crossing in every way keeping x-segment counts."""
    if not P.mirror:
        raise ValueError("codifferential applies to mirror slices")
    return _resolutions(P, x, introduce=True, keep_u=keep_u, slice_key=slice_key)


def _gen_product(P1: Shadow, f1: Generator, P2: Shadow, f2: Generator, P: Shadow):
    """Concatenated generator and base o-exponents, or None when the product dies."""
    if f1.T != f2.S:
        return None
    phi2 = f2.phi
    new_pairs = tuple((s, phi2[t]) for s, t in f1.pairs)
    st1 = strand_segments(f1)
    st2 = strand_segments(f2)
    st = tuple((2 * s, 2 * t) for s, t in new_pairs)
    if self_cross(st) != self_cross(st1) + self_cross(st2):
        return None
    _, x1, o1_by = slice_segments(P1)
    _, x2, o2_by = slice_segments(P2)
    _, xp, op_by = slice_segments(P)
    if cross_many(st, xp) != cross_many(st1, x1) + cross_many(st2, x2):
        return None
    base = {}
    for s_slot, t_mid in P1.omega:
        d = (
            cross_one(o1_by[s_slot], st1)
            + cross_one(o2_by[t_mid], st2)
            - cross_one(op_by[s_slot], st)
        )
        if d % 2:
            raise ArithmeticError("odd o-segment crossing change in product")
        if d < 0:
            raise ArithmeticError("negative U exponent in product")
        if d:
            base[s_slot] = d // 2
    return Generator(new_pairs), base


@lru_cache(maxsize=None)
def _compose_cached(P1: Shadow, P2: Shadow) -> Shadow:
    if not composable(P1, P2):
        raise ValueError("slices are not composable")
    return compose(P1, P2)


def multiply(
    P1: Shadow,
    e1: Element,
    P2: Shadow,
    e2: Element,
    *,
    key1: int = 0,
    key2: int = 0,
    key_out: int = 0,
    keep_u: bool = True,
) -> Element:
    """Concatenation product of elements over composable slices.

    U-keys of the factors are read at slice keys key1/key2 and written at
    key_out; o-slots of the second factor translate through the first
    slice's o-segments.  Keys at other slice indices pass through.
    """
    P = _compose_cached(P1, P2)
    if not e1 or not e2:
        return ZERO
    table1 = {(key1, s): (key_out, s) for s in P1.omega_sources}
    table2 = {(key2, t): (key_out, s) for s, t in P1.omega}
    out: set = set()
    for mono1, f1 in e1:
        for mono2, f2 in e2:
            r = _gen_product(P1, f1, P2, f2, P)
            if r is None:
                continue
            g, base = r
            mono = UMonomial(tuple(((key_out, s), e) for s, e in base.items()))
            mono = mono.times(mono1.rekey(table1)).times(mono2.rekey(table2))
            if not keep_u and not mono.is_unit:
                continue
            out ^= {(mono, g)}
    return frozenset(out)


def subsets(ground) -> list[tuple[int, ...]]:
    """All subsets of the ground set, by size then lexicographic order."""
    items = sorted(ground)
    return [
        c for r in range(len(items) + 1) for c in itertools.combinations(items, r)
    ]


@dataclass(frozen=True)
class StrandAlgebra:
    """The differential algebra of an idempotent slice."""

    shadow: Shadow
    slice_key: int = 0

    def __post_init__(self) -> None:
        if not is_idempotent(self.shadow):
            raise ValueError("algebra requires an idempotent slice")

    @property
    def size(self) -> int:
        return self.shadow.m

    def basis(self, k: int | None = None) -> list[Generator]:
        return enumerate_generators(self.shadow, k)

    def idempotents(self) -> list[Generator]:
        return [idempotent_gen(S) for S in subsets(range(1, self.size + 1))]

    def unit(self) -> Element:
        return frozenset((UNIT, g) for g in self.idempotents())

    def multiply(self, e1: Element, e2: Element, keep_u: bool = True) -> Element:
        return multiply(
            self.shadow,
            e1,
            self.shadow,
            e2,
            key1=self.slice_key,
            key2=self.slice_key,
            key_out=self.slice_key,
            keep_u=keep_u,
        )

    def differential(self, e: Element, keep_u: bool = True) -> Element:
        return differential(self.shadow, e, keep_u=keep_u, slice_key=self.slice_key)


def idempotent_algebra(E: Shadow, slice_key: int = 0) -> StrandAlgebra:
    """Algebra handle for an idempotent slice."""
    return StrandAlgebra(E, slice_key)
