"""Box tensor pairing of slice structures, reduction, and factor splitting.

Conventions
-----------
The box tensor of two structures over the same boundary algebra glues their
slice sequences end to end.  Generators are pairs whose idempotents on the
shared line agree; the differential adds the left factor's terms with the
right factor carried, plus the right factor's terms, whose algebra outputs
on the shared line act on the left factor (or symmetrically, depending on
which factor carries the algebra outputs).  U-keys of the right factor are
shifted by the left factor's length; U-keys on the shared-line algebra fold
through that line's o-segments during the action.  Because every action
with more than one algebra input vanishes, the differential is the two-term
sum and squares to zero.

Reduction cancels a differential term whose coefficient is a unit: both
algebra slots idempotent and no U-powers.  It requires a structure without
algebra-action sides, since cancelling under an action would need
transferred higher actions.  Pairs are cancelled lowest index first,
repeatedly, so the result is deterministic; with U-powers kept, the
transferred terms carry the accumulated monomials and the U-free part of
the outcome equals the U-free reduction.

A structure whose generators split into partner pairs, uniformly shifted in
bigrading and carried into each other by the whole differential, is a
two-dimensional tensor factor times a smaller core.  Splitting such factors
off during a long pairing keeps intermediate sizes proportional to the core
rather than doubling with every closed marking pair.

Splitting by generator subsets only finds factors visible in the given
basis.  With U-powers kept, each marking pair whose debt is fully folded in
links the two halves of its factor by differential terms carrying exactly
one power of that marking's U: the structure is a cone product, core tensor
a two-step factor.  Peeling extracts the upper half as a linear subspace
(image of the single-U map), certifies the cone shape by exact linear
checks, and rebases the structure onto that half with synthetic generator
names.  Every certificate failure leaves the structure unchanged, so
peeling is sound term-by-term and needs no appeal to equivalences.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import lru_cache

from .gradings import Bigrading
from .strands import Generator, UMonomial, UNIT, gen_elem, multiply
from .wedge import (
    LEFT_ALGEBRA_KEY,
    RIGHT_ALGEBRA_KEY,
    StrandStructure,
    WedgeSequence,
)

V_SHIFT = Bigrading(-1, -2)
W_SHIFT = Bigrading(-1, 0)


def _shift_table(slices, off: int) -> dict:
    table = {}
    for j, P in enumerate(slices):
        for s in P.omega_sources:
            table[(j, s)] = (j + off, s)
    return table


def _split_exps(mono: UMonomial, fold_key: int, keep_key: int):
    """Partition exponents into action-folded and carried parts.

    Exponents at fold_key are re-addressed to the acting algebra's key so
    the product folds them across the shared line; exponents at keep_key
    stay outside the action; everything else rides through the product.
    """
    feed = []
    kept = []
    for (k, s), e in mono.exps:
        if k == fold_key:
            feed.append((((-1 if fold_key == RIGHT_ALGEBRA_KEY else -2), s), e))
        elif k == keep_key:
            kept.append((((k, s)), e))
        else:
            feed.append((((k, s)), e))
    return UMonomial(tuple(feed)), UMonomial(tuple(kept))


def box_tensor(M: StrandStructure, N: StrandStructure) -> StrandStructure:
    """Glued structure of two factors over one shared boundary algebra."""
    kinds = (M.right_kind, N.left_kind)
    if kinds not in (("A", "D"), ("D", "A")):
        raise ValueError("box tensor needs one action side facing one output side")
    if M.right_algebra.shadow != N.left_algebra.shadow:
        raise ValueError("shared boundary algebras differ")
    if M.keep_u != N.keep_u:
        raise ValueError("factors disagree on U bookkeeping")
    keep_u = M.keep_u
    seq = WedgeSequence(
        M.seq.slices + N.seq.slices,
        contract_left=M.seq.contract_left,
        contract_right=N.seq.contract_right,
    )
    off = len(M.seq.slices)
    shift = _shift_table(N.seq.slices, off)

    by_left_idem: dict = {}
    for y in N.generators:
        by_left_idem.setdefault(N.idempotents[y][0], []).append(y)

    gens = []
    for x in M.generators:
        for y in by_left_idem.get(M.idempotents[x][1], ()):
            gens.append(x + y)
    gen_set = set(gens)

    idempotents = {}
    gradings = {}
    delta = {}
    for x in M.generators:
        ri_x = M.idempotents[x][1]
        for y in by_left_idem.get(ri_x, ()):
            gt = x + y
            li, ri = M.idempotents[x][0], N.idempotents[y][1]
            idempotents[gt] = (li, ri)
            gradings[gt] = M.gradings[x] + N.gradings[y]
            lslot = li if seq.left_kind == "D" else None
            rslot = ri if seq.right_kind == "D" else None
            terms: set = set()
            if kinds == ("A", "D"):
                for l, m, x2, _ in M.delta[x]:
                    if x2 + y not in gen_set:
                        raise ArithmeticError("left factor term leaves the pairing")
                    terms ^= {(l, m, x2 + y, rslot)}
                for a, m, y2, b in N.delta[y]:
                    feed, kept = _split_exps(
                        m.rekey(shift), LEFT_ALGEBRA_KEY, RIGHT_ALGEBRA_KEY
                    )
                    for mm, x2 in M.act_right(x, gen_elem(a, feed)):
                        if x2 + y2 not in gen_set:
                            raise ArithmeticError("action left the generator set")
                        mono = mm.times(kept)
                        if not keep_u and not mono.is_unit:
                            continue
                        terms ^= {(lslot, mono, x2 + y2, b)}
            else:
                for a, m, y2, b in N.delta[y]:
                    if x + y2 not in gen_set:
                        raise ArithmeticError("right factor term leaves the pairing")
                    terms ^= {(lslot, m.rekey(shift), x + y2, b)}
                EL = N.left_algebra.shadow
                Q = N.seq.slices[0]
                for l, m, x2, r in M.delta[x]:
                    feed, kept = _split_exps(m, RIGHT_ALGEBRA_KEY, LEFT_ALGEBRA_KEY)
                    prod = multiply(
                        EL,
                        gen_elem(r, feed),
                        Q,
                        gen_elem(y[0]),
                        key1=LEFT_ALGEBRA_KEY,
                        key2=off,
                        key_out=off,
                        keep_u=keep_u,
                    )
                    for mm, g0 in prod:
                        y2 = (g0,) + y[1:]
                        if x2 + y2 not in gen_set:
                            raise ArithmeticError("action left the generator set")
                        mono = mm.times(kept)
                        if not keep_u and not mono.is_unit:
                            continue
                        terms ^= {(l, mono, x2 + y2, rslot)}
            delta[gt] = frozenset(terms)
    return StrandStructure(
        seq=seq,
        left_algebra=M.left_algebra,
        right_algebra=N.right_algebra,
        generators=tuple(gens),
        idempotents=idempotents,
        gradings=gradings,
        delta=delta,
        keep_u=keep_u,
    )


@lru_cache(maxsize=None)
def _slot_is_idempotent(g: Generator) -> bool:
    return g.is_idempotent()


def _is_unit_term(term) -> bool:
    l, mono, _, r = term
    if not mono.is_unit:
        return False
    if l is not None and not _slot_is_idempotent(l):
        return False
    if r is not None and not _slot_is_idempotent(r):
        return False
    return True


def _slot_product(alg, s1: Generator | None, s2: Generator | None, keep_u: bool):
    """Products of two slot values: [(monomial, slot)] over the algebra, or a unit."""
    if s1 is None and s2 is None:
        return [(UNIT, None)]
    return [(m, g) for m, g in alg.multiply(gen_elem(s1), gen_elem(s2), keep_u=keep_u)]


def reduce_structure(S: StrandStructure, *, pivot: str = "index") -> StrandStructure:
    """Cancel unit differential terms until none remain.

    Unit terms are U-free with idempotent algebra slots, so the cancelled
    pairs do not depend on whether U-powers are kept; with them kept the
    transferred terms carry the accumulated monomials.  The pivot policy
    picks the lowest-index cancellable pair by default; "fill" picks a
    cheapest pair first, which changes only the intermediate bases.
    """
    if "A" in (S.left_kind, S.right_kind):
        raise ValueError("reduction under an algebra action is not supported")
    if pivot not in ("index", "fill"):
        raise ValueError("unknown pivot policy")
    order = {gt: i for i, gt in enumerate(S.generators)}
    alive = set(S.generators)
    delta: dict = {gt: {} for gt in S.generators}
    sources: dict = {gt: set() for gt in S.generators}
    for w, ts in S.delta.items():
        byz = delta[w]
        for (l, m, z, r) in ts:
            byz.setdefault(z, set()).add((l, m, r))
            sources[z].add(w)

    by_fill = pivot == "fill"

    def edge_key(x, y):
        if by_fill:
            cost = (len(sources[y]) - 1) * (len(delta[x]) - 1)
            return (cost, order[x], order[y])
        return (order[x], order[y])

    def has_unit(x, y):
        decs = delta[x].get(y)
        if not decs:
            return False
        return any(
            _is_unit_term((dec[0], dec[1], y, dec[2])) for dec in decs
        )

    heap = [
        (edge_key(x, y), x, y)
        for x in S.generators
        for y in delta[x]
        if y != x and has_unit(x, y)
    ]
    heapq.heapify(heap)

    def unlink(w, z):
        del delta[w][z]
        sources[z].discard(w)

    prods: dict = {}

    def slot_product(side, alg, s1, s2):
        key = (side, s1, s2)
        if key not in prods:
            prods[key] = _slot_product(alg, s1, s2, S.keep_u)
        return prods[key]

    left_acts = S.left_kind == "D"
    right_acts = S.right_kind == "D"
    unit_pair = ((UNIT, None),)

    while heap:
        key, x, y = heapq.heappop(heap)
        if x not in alive or y not in alive or not has_unit(x, y):
            continue
        if by_fill:
            fresh = edge_key(x, y)
            if fresh != key:
                heapq.heappush(heap, (fresh, x, y))
                continue
        into_y = [
            (w, dec)
            for w in sorted(sources[y], key=order.get)
            if w != x and w != y
            for dec in delta[w][y]
        ]
        out_x = [
            (z, dec)
            for z, decs in delta[x].items()
            if z != x and z != y
            for dec in decs
        ]
        alive.discard(x)
        alive.discard(y)
        for dead in (x, y):
            for z in list(delta[dead]):
                unlink(dead, z)
            for w in list(sources[dead]):
                if w != x and w != y:
                    unlink(w, dead)
            sources[dead].clear()
        for w, (a, m1, b) in into_y:
            byz = delta[w]
            for z, (a2, m2, b2) in out_x:
                lprods = (
                    slot_product("L", S.left_algebra, a, a2)
                    if left_acts
                    else unit_pair
                )
                rprods = (
                    slot_product("R", S.right_algebra, b2, b)
                    if right_acts
                    else unit_pair
                )
                had_unit = has_unit(w, z)
                for mA, l3 in lprods:
                    for mB, r3 in rprods:
                        mono = m1.times(m2).times(mA).times(mB)
                        if not S.keep_u and not mono.is_unit:
                            continue
                        dec = (l3, mono, r3)
                        decs = byz.get(z)
                        if decs is None:
                            byz[z] = {dec}
                            sources[z].add(w)
                        elif dec in decs:
                            decs.discard(dec)
                            if not decs:
                                unlink(w, z)
                        else:
                            decs.add(dec)
                if w != z and not had_unit and has_unit(w, z):
                    heapq.heappush(heap, (edge_key(w, z), w, z))

    kept = tuple(g for g in S.generators if g in alive)
    return StrandStructure(
        seq=S.seq,
        left_algebra=S.left_algebra,
        right_algebra=S.right_algebra,
        generators=kept,
        idempotents={gt: S.idempotents[gt] for gt in kept},
        gradings={gt: S.gradings[gt] for gt in kept},
        delta={
            gt: frozenset(
                (l, m, z, r)
                for z, decs in delta[gt].items()
                for (l, m, r) in decs
            )
            for gt in kept
        },
        keep_u=S.keep_u,
    )


def _partner_consistent(delta, color, partner, x) -> bool:
    """Check the assigned part of the partner constraint at x."""
    px = partner[x]
    for a, m, z, b in delta[x]:
        if z in color and color[z] != color[x]:
            return False
        if z in partner:
            if (a, m, partner[z], b) not in delta[px]:
                return False
    for a, m, z, b in delta[px]:
        if z in color and color[z] != color[px]:
            return False
        if z in partner:
            if (a, m, partner[z], b) not in delta[x]:
                return False
    return True


def _components(S: StrandStructure):
    """Delta-connected components, each sorted, listed by first generator."""
    order = {g: i for i, g in enumerate(S.generators)}
    adj: dict = {g: set() for g in S.generators}
    for g, ts in S.delta.items():
        for _, _, z, _ in ts:
            if z != g:
                adj[g].add(z)
                adj[z].add(g)
    comps = []
    seen: set = set()
    for g in S.generators:
        if g in seen:
            continue
        seen.add(g)
        comp = [g]
        stack = [g]
        while stack:
            u = stack.pop()
            for v in sorted(adj[u], key=order.get):
                if v not in seen:
                    seen.add(v)
                    comp.append(v)
                    stack.append(v)
        comps.append(sorted(comp, key=order.get))
    return comps, order


def _match_components(S, shift, upper, lower, partner, color, order, budget) -> bool:
    """Extend partner/color by an isomorphism pairing two components."""

    def assign(i: int) -> bool:
        if budget[0] <= 0:
            return False
        budget[0] -= 1
        if i == len(upper):
            return True
        g = upper[i]
        key = (S.idempotents[g], S.gradings[g] + shift)
        for h in lower:
            if h in partner:
                continue
            if (S.idempotents[h], S.gradings[h]) != key:
                continue
            partner[g] = h
            partner[h] = g
            color[g] = 0
            color[h] = 1
            if _partner_consistent(S.delta, color, partner, g) and assign(i + 1):
                return True
            del partner[g], partner[h], color[g], color[h]
        return False

    return assign(0)


def _find_split(S: StrandStructure, shift: Bigrading):
    """A partner pairing shifted by the given bigrading, or None.

    Differential terms never cross the pairing's two sides, so each
    delta-connected component lies on one side and is paired with an
    isomorphic component shifted in grading.  Components are matched
    top maslov first; within a matched pair the isomorphism is found by
    backtracking over grading classes.
    """
    gens = list(S.generators)
    if len(gens) % 2:
        return None
    classes: dict = {}
    for g in gens:
        classes.setdefault((S.idempotents[g], S.gradings[g]), []).append(g)
    for (idem, grd), members in classes.items():
        size_down = len(classes.get((idem, grd + shift), []))
        size_up = len(classes.get((idem, grd - shift), []))
        if len(members) > size_down + size_up:
            return None

    comps, order = _components(S)
    idem_ix: dict = {}

    def signature(comp, shifted: bool):
        sig = []
        for g in comp:
            idem = S.idempotents[g]
            grd = S.gradings[g] + shift if shifted else S.gradings[g]
            sig.append((idem_ix.setdefault(idem, len(idem_ix)), grd))
        sig.sort()
        return tuple(sig)

    plain_sigs = [signature(c, False) for c in comps]
    shifted_sigs = [signature(c, True) for c in comps]
    top = [min((-S.gradings[g].maslov, order[g]) for g in c) for c in comps]
    partner: dict = {}
    color: dict = {}
    budget = [200000]

    def pair_all(unpaired) -> bool:
        if budget[0] <= 0:
            return False
        budget[0] -= 1
        if not unpaired:
            return all(_partner_consistent(S.delta, color, partner, g) for g in gens)
        i = min(unpaired, key=lambda j: top[j])
        rest = [j for j in unpaired if j != i]
        want = shifted_sigs[i]
        for j in rest:
            if plain_sigs[j] != want:
                continue
            saved = (dict(partner), dict(color))
            if _match_components(
                S, shift, comps[i], comps[j], partner, color, order, budget
            ) and pair_all([k for k in rest if k != j]):
                return True
            partner.clear()
            partner.update(saved[0])
            color.clear()
            color.update(saved[1])
        return False

    if pair_all(list(range(len(comps)))):
        return dict(partner), dict(color)
    return None


def split_factor(S: StrandStructure, shift: Bigrading):
    """Split off one two-dimensional factor with the given shift, or None."""
    found = _find_split(S, shift)
    if found is None:
        return None
    partner, color = found
    kept = tuple(g for g in S.generators if color[g] == 0)
    for g in kept:
        for _, _, z, _ in S.delta[g]:
            if color[z] != 0:
                raise ArithmeticError("split pairing does not respect the differential")
    return StrandStructure(
        seq=S.seq,
        left_algebra=S.left_algebra,
        right_algebra=S.right_algebra,
        generators=kept,
        idempotents={g: S.idempotents[g] for g in kept},
        gradings={g: S.gradings[g] for g in kept},
        delta={g: S.delta[g] for g in kept},
        keep_u=S.keep_u,
    )


def split_all_factors(S: StrandStructure, shifts=(V_SHIFT, W_SHIFT)):
    """Split factors greedily; returns (core, counts per shift)."""
    counts = {shift: 0 for shift in shifts}
    changed = True
    while changed and S.generators:
        changed = False
        for shift in shifts:
            smaller = split_factor(S, shift)
            if smaller is not None:
                S = smaller
                counts[shift] += 1
                changed = True
                break
    return S, counts


@dataclass(frozen=True)
class VirtGen:
    """Synthetic generator name for a rebased factor core."""

    ix: int


class _GF2Basis:
    """Reduced echelon basis of bit vectors with coordinate extraction."""

    def __init__(self):
        self.rows: list[int] = []
        self.pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.rows)

    def decompose(self, v: int):
        """Coordinates over the rows plus the unreducible remainder."""
        coords = 0
        for i, p in enumerate(self.pivots):
            if (v >> p) & 1:
                v ^= self.rows[i]
                coords |= 1 << i
        return coords, v

    def insert(self, v: int) -> bool:
        _, rem = self.decompose(v)
        if rem == 0:
            return False
        p = rem.bit_length() - 1
        for i, row in enumerate(self.rows):
            if (row >> p) & 1:
                self.rows[i] = row ^ rem
        at = next((i for i, q in enumerate(self.pivots) if q < p), len(self.pivots))
        self.rows.insert(at, rem)
        self.pivots.insert(at, p)
        return True


def _solve_gf2(equations) -> bool:
    """Solvability of a sparse GF(2) system given as (mask, rhs) rows."""
    pivots: dict = {}
    for mask, rhs in equations:
        while mask:
            p = mask.bit_length() - 1
            row = pivots.get(p)
            if row is None:
                pivots[p] = (mask, rhs)
                break
            mask ^= row[0]
            rhs ^= row[1]
        else:
            if rhs:
                return False
    return True


def _gen_sort_key(g):
    return () if g is None else g.pairs


def _class_sort_key(cls):
    (li, ri), grd = cls
    return (grd.maslov, grd.alexander2, _gen_sort_key(li), _gen_sort_key(ri))


def _mono_key_exp(mono: UMonomial, key) -> int:
    return sum(e for k, e in mono.exps if k == key)


def peel_factor(S: StrandStructure, key, name_base: int):
    """Extract the core of one two-step cone factor anchored on a key, or None.

    With U-powers kept, the differential terms carrying exactly U_key with
    idempotent slots span an upper half; the structure is certified to be
    the mapping cone of a map from a shifted copy of that half into it,
    where the connecting map may carry arbitrary nonunit monomials.  The
    exact checks: the upper half pairs off every grading class, is closed
    under the differential, the quotient is carried isomorphically onto
    the upper half intertwining every decorated term, and the unit-width
    part of the cross terms can be absorbed by a change of complement.
    Because the connecting map vanishes once all U-powers are dropped, the
    peeled copy contributes one doubling of the U-free account and nothing
    else.  Any failed check returns None.
    """
    gens = S.generators
    if not gens:
        return None
    cls_of = {}
    members: dict = {}
    for g in gens:
        c = (S.idempotents[g], S.gradings[g])
        cls_of[g] = c
        members.setdefault(c, []).append(g)
    pos = {}
    for ms in members.values():
        for i, g in enumerate(ms):
            pos[g] = i

    def up_class(c):
        idem, grd = c
        return (idem, grd - V_SHIFT)

    phi = {g: 0 for g in gens}
    grouped = {g: {} for g in gens}
    for g in gens:
        for (l, m, z, r) in S.delta[g]:
            anchor = (
                m.exps == ((key, 1),)
                and (l is None or _slot_is_idempotent(l))
                and (r is None or _slot_is_idempotent(r))
            )
            if anchor:
                if cls_of[z] != up_class(cls_of[g]):
                    return None
                phi[g] ^= 1 << pos[z]
            else:
                d = grouped[g]
                tkey = (l, m, r)
                tc, vec = d.get(tkey, (cls_of[z], 0))
                if tc != cls_of[z]:
                    return None
                d[tkey] = (tc, vec ^ (1 << pos[z]))

    upper: dict = {c: _GF2Basis() for c in members}
    for c, ms in members.items():
        uc = up_class(c)
        for g in ms:
            if phi[g]:
                if uc not in upper:
                    return None
                upper[uc].insert(phi[g])
    for c, ms in members.items():
        uc = up_class(c)
        up_rank = upper[uc].rank if uc in upper else 0
        if len(ms) != upper[c].rank + up_rank:
            return None

    reps = {c: [i for i in range(len(ms)) if i not in upper[c].pivots]
            for c, ms in members.items()}
    for c in members:
        uc = up_class(c)
        up_rank = upper[uc].rank if uc in upper else 0
        if len(reps[c]) != up_rank:
            return None

    phibar = {}
    for c, ms in members.items():
        if not reps[c]:
            continue
        uc = up_class(c)
        check = _GF2Basis()
        for j, p in enumerate(reps[c]):
            coords, rem = upper[uc].decompose(phi[ms[p]])
            if rem:
                return None
            if not check.insert(coords):
                return None
            phibar[(c, j)] = coords

    def combine(c, vec):
        out: dict = {}
        ms = members[c]
        while vec:
            i = (vec & -vec).bit_length() - 1
            vec &= vec - 1
            for tkey, (tc, w) in grouped[ms[i]].items():
                otc, ow = out.get(tkey, (tc, 0))
                if otc != tc:
                    raise ArithmeticError("differential term class mismatch")
                out[tkey] = (tc, ow ^ w)
        return {tkey: tw for tkey, tw in out.items() if tw[1]}

    d_up: dict = {}
    for c in members:
        for i, row in enumerate(upper[c].rows):
            entry = {}
            for tkey, (tc, w) in combine(c, row).items():
                coords, rem = upper[tc].decompose(w)
                if rem:
                    return None
                entry[tkey] = (tc, coords)
            d_up[(c, i)] = entry

    d_rep: dict = {}
    a_rep: dict = {}
    for c, ms in members.items():
        for j, p in enumerate(reps[c]):
            db = {}
            da = {}
            for tkey, (tc, w) in grouped[ms[p]].items():
                if not w:
                    continue
                coords, rem = upper[tc].decompose(w)
                bvec = 0
                for jj, pp in enumerate(reps[tc]):
                    if (rem >> pp) & 1:
                        bvec |= 1 << jj
                        rem ^= 1 << pp
                if rem:
                    raise ArithmeticError("complement coordinates escaped the class")
                db[tkey] = (tc, bvec)
                da[tkey] = (tc, coords)
            d_rep[(c, j)] = db
            a_rep[(c, j)] = da

    for c in members:
        uc = up_class(c)
        for j in range(len(reps[c])):
            lhs: dict = {}
            for tkey, (tc, bvec) in d_rep[(c, j)].items():
                acc = 0
                while bvec:
                    t = (bvec & -bvec).bit_length() - 1
                    bvec &= bvec - 1
                    acc ^= phibar[(tc, t)]
                if acc:
                    lhs[tkey] = (up_class(tc), acc)
            rhs: dict = {}
            cvec = phibar[(c, j)]
            while cvec:
                i = (cvec & -cvec).bit_length() - 1
                cvec &= cvec - 1
                for tkey, (tc, coords) in d_up[(uc, i)].items():
                    otc, oc = rhs.get(tkey, (tc, 0))
                    rhs[tkey] = (tc, oc ^ coords)
            rhs = {tkey: tv for tkey, tv in rhs.items() if tv[1]}
            if lhs != rhs:
                return None

    offsets = {}
    total = 0
    for c in sorted(members, key=_class_sort_key):
        width = upper[c].rank
        for j in range(len(reps[c])):
            offsets[(c, j)] = (total, width)
            total += width
    equations = []
    for c in members:
        for j in range(len(reps[c])):
            tkeys = set(d_rep[(c, j)])
            for i in range(upper[c].rank):
                tkeys |= set(d_up[(c, i)])
            tkeys = {tkey for tkey in tkeys if tkey[1].is_unit}
            for tkey in tkeys:
                tc, avec = a_rep[(c, j)].get(tkey, (None, 0))
                tcb, bvec = d_rep[(c, j)].get(tkey, (None, 0))
                tc = tc or tcb
                if tc is None:
                    for i in range(upper[c].rank):
                        if tkey in d_up[(c, i)]:
                            tc = d_up[(c, i)][tkey][0]
                            break
                own_off = offsets[(c, j)][0]
                for bit in range(upper[tc].rank):
                    mask = 0
                    rhs = (avec >> bit) & 1
                    bb = bvec
                    while bb:
                        t = (bb & -bb).bit_length() - 1
                        bb &= bb - 1
                        mask ^= 1 << (offsets[(tc, t)][0] + bit)
                    for i in range(upper[c].rank):
                        entry = d_up[(c, i)].get(tkey)
                        if entry is not None and ((entry[1] >> bit) & 1):
                            mask ^= 1 << (own_off + i)
                    if mask or rhs:
                        equations.append((mask, rhs))
    if not _solve_gf2(equations):
        return None

    named = {}
    order = []
    counter = name_base
    for c in sorted(members, key=_class_sort_key):
        for i in range(upper[c].rank):
            named[(c, i)] = (VirtGen(counter),)
            order.append((c, i))
            counter += 1
    idempotents = {}
    gradings = {}
    delta = {}
    for (c, i) in order:
        v = named[(c, i)]
        idem, grd = c
        idempotents[v] = idem
        gradings[v] = grd
        terms = set()
        for tkey, (tc, coords) in d_up[(c, i)].items():
            l, m, r = tkey
            cc = coords
            while cc:
                t = (cc & -cc).bit_length() - 1
                cc &= cc - 1
                terms.add((l, m, named[(tc, t)], r))
        delta[v] = frozenset(terms)
    core = StrandStructure(
        seq=S.seq,
        left_algebra=S.left_algebra,
        right_algebra=S.right_algebra,
        generators=tuple(named[k] for k in order),
        idempotents=idempotents,
        gradings=gradings,
        delta=delta,
        keep_u=S.keep_u,
    )
    return core, counter


def peel_all_factors(S: StrandStructure):
    """Peel every marking cone factor that certifies; returns (core, count)."""
    count = 0
    name_base = 0
    while True:
        keys = set()
        for ts in S.delta.values():
            for _, m, _, _ in ts:
                if len(m.exps) == 1 and m.exps[0][1] == 1:
                    keys.add(m.exps[0][0])
        progress = False
        for key in sorted(keys):
            got = peel_factor(S, key, name_base)
            if got is not None:
                S, name_base = got
                count += 1
                progress = True
                break
        if not progress:
            return S, count


@dataclass(frozen=True)
class PairedResult:
    """A folded structure plus the factor counts split off along the way."""

    structure: StrandStructure
    splits: dict

    @property
    def v_splits(self) -> int:
        return self.splits.get(V_SHIFT, 0)

    @property
    def w_splits(self) -> int:
        return self.splits.get(W_SHIFT, 0)


def _reducible(S: StrandStructure) -> bool:
    return "A" not in (S.left_kind, S.right_kind)


def pair_sequence(structures, *, reduce_after: bool = True, split_after: bool = True) -> PairedResult:
    """Left-to-right box tensor fold with interleaved reduction and splitting."""
    structures = list(structures)
    if not structures:
        raise ValueError("nothing to pair")
    counts = {V_SHIFT: 0, W_SHIFT: 0}

    def crunch(S: StrandStructure) -> StrandStructure:
        if not _reducible(S):
            return S
        if reduce_after:
            S = reduce_structure(S)
        if split_after:
            if S.keep_u:
                S, peeled = peel_all_factors(S)
                counts[V_SHIFT] = counts.get(V_SHIFT, 0) + peeled
            S, more = split_all_factors(S)
            for shift, c in more.items():
                counts[shift] = counts.get(shift, 0) + c
        return S

    acc = crunch(structures[0])
    for nxt in structures[1:]:
        acc = crunch(box_tensor(acc, crunch(nxt)))
    return PairedResult(acc, counts)
