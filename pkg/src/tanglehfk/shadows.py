"""Slice diagrams (shadows) and their elementary building blocks.

Conventions
-----------
A Shadow is a combinatorial slice with two vertical boundary lines.  The
left line carries integer heights 1..m, the right line integer heights
1..n.  Between consecutive integer heights sit half-integer slots, encoded
by their floor: slot j stands for height j + 1/2, so the left line has
slots 1..m-1 and the right line slots 1..n-1.

Two families of disjoint oriented segments join boundary slots:

* x-segments run right to left; ``xi`` lists (right slot, left slot).
* o-segments run left to right; ``omega`` lists (left slot, right slot).

A right slot may be both an x-segment source and an o-segment target (and
a left slot both an x-segment target and an o-segment source); such a slot
is a turn, where the two segments join into one arc that doubles back.

The ``mirror`` flag marks a slice that is read reflected, with the right
line drawn on the left.  The stored data is unchanged; operators that care
(codifferential, wedge pairing, contractions) branch on the flag.

Sign vectors ``eps`` for elementary slices list strand orientations bottom
to top, +1 for rightward and -1 for leftward.  In a straight slice the
strand at height j + 1/2 is an x-segment when eps[j-1] == -1 and an
o-segment when eps[j-1] == +1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

Pairs = tuple[tuple[int, int], ...]


def _as_pairs(pairs) -> Pairs:
    """Coerce to a source-sorted tuple of int pairs."""
    return tuple(sorted((int(s), int(t)) for s, t in pairs))


def _check_bijection(pairs: Pairs, src_bound: int, tgt_bound: int, label: str) -> None:
    sources = [s for s, _ in pairs]
    targets = [t for _, t in pairs]
    if len(set(sources)) != len(sources):
        raise ValueError(f"{label}: repeated source slot")
    if len(set(targets)) != len(targets):
        raise ValueError(f"{label}: repeated target slot")
    for s in sources:
        if not 1 <= s <= src_bound:
            raise ValueError(f"{label}: source slot {s} outside 1..{src_bound}")
    for t in targets:
        if not 1 <= t <= tgt_bound:
            raise ValueError(f"{label}: target slot {t} outside 1..{tgt_bound}")


@dataclass(frozen=True)
class Shadow:
    """A slice with left size m, right size n, and its two segment families."""

    m: int
    n: int
    xi: Pairs
    omega: Pairs
    mirror: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "xi", _as_pairs(self.xi))
        object.__setattr__(self, "omega", _as_pairs(self.omega))
        if self.m < 1 or self.n < 1:
            raise ValueError("boundary sizes must be at least 1")
        _check_bijection(self.xi, self.n - 1, self.m - 1, "xi")
        _check_bijection(self.omega, self.m - 1, self.n - 1, "omega")

    @property
    def xi_sources(self) -> frozenset[int]:
        return frozenset(s for s, _ in self.xi)

    @property
    def xi_targets(self) -> frozenset[int]:
        return frozenset(t for _, t in self.xi)

    @property
    def omega_sources(self) -> frozenset[int]:
        return frozenset(s for s, _ in self.omega)

    @property
    def omega_targets(self) -> frozenset[int]:
        return frozenset(t for _, t in self.omega)

    @property
    def xi_map(self) -> dict[int, int]:
        return dict(self.xi)

    @property
    def xi_inv_map(self) -> dict[int, int]:
        return {t: s for s, t in self.xi}

    @property
    def omega_map(self) -> dict[int, int]:
        return dict(self.omega)

    @property
    def omega_inv_map(self) -> dict[int, int]:
        return {t: s for s, t in self.omega}


def make_shadow(m: int, n: int, xi_pairs, omega_pairs, mirror: bool = False) -> Shadow:
    """Validate and build a Shadow from explicit segment endpoint pairs."""
    return Shadow(int(m), int(n), _as_pairs(xi_pairs), _as_pairs(omega_pairs), bool(mirror))


def as_mirror(P: Shadow) -> Shadow:
    """The same slice data, read reflected."""
    return replace(P, mirror=True)


def as_plain(P: Shadow) -> Shadow:
    """The same slice data, read unreflected."""
    return replace(P, mirror=False)


def half_slots(size: int) -> frozenset[int]:
    """All half-height slots of a boundary line with the given integer size."""
    return frozenset(range(1, size))


def inv_pairs(pairs: Pairs) -> int:
    """Number of order-reversing pairs of a slot bijection.

    >>> inv_pairs(((1, 2), (2, 1)))
    1
    """
    items = sorted(pairs)
    return sum(
        1
        for i in range(len(items))
        for j in range(i + 1, len(items))
        if items[i][1] > items[j][1]
    )


def cross_inv(pairs_a: Pairs, pairs_b: Pairs) -> int:
    """Number of crossings between two families of same-direction segments."""
    return sum(
        1
        for sa, ta in pairs_a
        for sb, tb in pairs_b
        if (sa - sb) * (ta - tb) < 0
    )


def xi_inv_pairs(P: Shadow) -> Pairs:
    """The x-segments presented left to right, as (left slot, right slot)."""
    return _as_pairs((t, s) for s, t in P.xi)


def shadow_inv_counts(P: Shadow) -> tuple[int, int, int]:
    """(inv of xi, inv of omega, crossings of o-segments with reversed x-segments)."""
    rev = xi_inv_pairs(P)
    return inv_pairs(P.xi), inv_pairs(P.omega), cross_inv(P.omega, rev)


def _check_signs(eps) -> tuple[int, ...]:
    e = tuple(int(v) for v in eps)
    if not e:
        raise ValueError("sign vector must be nonempty")
    if any(v not in (1, -1) for v in e):
        raise ValueError("sign vector entries must be +1 or -1")
    return e


def elementary_straight(eps) -> Shadow:
    """Slice of parallel strands; strand j sits at height j + 1/2.

    >>> elementary_straight((1, -1)).xi
    ((2, 2),)
    """
    e = _check_signs(eps)
    k = len(e)
    xi = tuple((j, j) for j in range(1, k + 1) if e[j - 1] == -1)
    omega = tuple((j, j) for j in range(1, k + 1) if e[j - 1] == 1)
    return Shadow(k + 1, k + 1, xi, omega, False)


def elementary_crossing(eps, i: int) -> Shadow:
    """Slice where the strands at heights i - 1/2 and i + 1/2 cross.

    eps lists left-side orientations; slots i-1 and i swap on the right.
    """
    e = _check_signs(eps)
    k = len(e)
    if not 2 <= i <= k:
        raise ValueError(f"crossing index {i} outside 2..{k}")

    def sw(j: int) -> int:
        return i if j == i - 1 else i - 1 if j == i else j

    xi = tuple((sw(j), j) for j in range(1, k + 1) if e[j - 1] == -1)
    omega = tuple((j, sw(j)) for j in range(1, k + 1) if e[j - 1] == 1)
    return Shadow(k + 1, k + 1, xi, omega, False)


def elementary_cap(eps, i: int) -> Shadow:
    """Slice where left strands i and i+1 join into a rightward turn.

    eps lists the k left-side orientations; the turn occupies right slot i,
    and higher strands shift down one slot on the right.
    """
    e = _check_signs(eps)
    k = len(e)
    if not 1 <= i <= k - 1:
        raise ValueError(f"cap index {i} outside 1..{k - 1}")
    if e[i - 1] * e[i] != -1:
        raise ValueError("cap strands must have opposite orientations")

    def shift(j: int) -> int:
        return j if j <= i else j - 1

    xi = tuple((shift(j), j) for j in range(1, k + 1) if e[j - 1] == -1)
    omega = tuple((j, shift(j)) for j in range(1, k + 1) if e[j - 1] == 1)
    return Shadow(k + 1, k, xi, omega, False)


def elementary_cup(eps, i: int) -> Shadow:
    """Slice where right strands i and i+1 emerge from a leftward turn.

    eps lists the k right-side orientations; the turn occupies left slot i.
    """
    e = _check_signs(eps)
    k = len(e)
    if not 1 <= i <= k - 1:
        raise ValueError(f"cup index {i} outside 1..{k - 1}")
    if e[i - 1] * e[i] != -1:
        raise ValueError("cup strands must have opposite orientations")

    def shift(j: int) -> int:
        return j if j <= i else j - 1

    xi = tuple((j, shift(j)) for j in range(1, k + 1) if e[j - 1] == -1)
    omega = tuple((shift(j), j) for j in range(1, k + 1) if e[j - 1] == 1)
    return Shadow(k, k + 1, xi, omega, False)


def insert_gap_left(P: Shadow, i: int) -> Shadow:
    """Insert an empty left slot at position i, shifting higher slots up."""
    if not 1 <= i <= P.m:
        raise ValueError(f"gap slot {i} outside 1..{P.m}")
    xi = tuple((s, t if t < i else t + 1) for s, t in P.xi)
    omega = tuple((s if s < i else s + 1, t) for s, t in P.omega)
    return Shadow(P.m + 1, P.n, xi, omega, P.mirror)


def insert_gap_right(P: Shadow, i: int) -> Shadow:
    """Insert an empty right slot at position i, shifting higher slots up."""
    if not 1 <= i <= P.n:
        raise ValueError(f"gap slot {i} outside 1..{P.n}")
    xi = tuple((s if s < i else s + 1, t) for s, t in P.xi)
    omega = tuple((s, t if t < i else t + 1) for s, t in P.omega)
    return Shadow(P.m, P.n + 1, xi, omega, P.mirror)


def compose(P1: Shadow, P2: Shadow) -> Shadow:
    """Concatenate two slices, P1 drawn to the left of P2."""
    if P1.mirror != P2.mirror:
        raise ValueError("cannot concatenate mirror with plain slice")
    if P1.n != P2.m:
        raise ValueError("inner boundary sizes differ")
    if P1.xi_sources != P2.xi_targets:
        raise ValueError("x-segment endpoints do not match on the inner boundary")
    if P1.omega_targets != P2.omega_sources:
        raise ValueError("o-segment endpoints do not match on the inner boundary")
    xi1 = P1.xi_map
    om2 = P2.omega_map
    xi = tuple((s, xi1[t]) for s, t in P2.xi)
    omega = tuple((s, om2[t]) for s, t in P1.omega)
    return Shadow(P1.m, P2.n, xi, omega, P1.mirror)


def composable(P1: Shadow, P2: Shadow) -> bool:
    """True when concatenation exists and all segment crossing counts add up."""
    try:
        P = compose(P1, P2)
    except ValueError:
        return False
    c1 = shadow_inv_counts(P1)
    c2 = shadow_inv_counts(P2)
    c = shadow_inv_counts(P)
    return all(c[i] == c1[i] + c2[i] for i in range(3))


def is_idempotent(E: Shadow) -> bool:
    """True when E concatenates with itself to give E back."""
    return (
        E.m == E.n
        and all(s == t for s, t in E.xi)
        and all(s == t for s, t in E.omega)
    )


def _idem(size: int, x_slots, o_slots) -> Shadow:
    return Shadow(
        size,
        size,
        tuple((j, j) for j in sorted(x_slots)),
        tuple((j, j) for j in sorted(o_slots)),
        False,
    )


def left_algebra_shadow(P: Shadow) -> Shadow:
    """Idempotent slice whose algebra acts on the drawn-left boundary of P."""
    if P.mirror:
        full = half_slots(P.n)
        return _idem(P.n, full - P.xi_sources, full - P.omega_targets)
    return _idem(P.m, P.xi_targets, P.omega_sources)


def right_algebra_shadow(P: Shadow) -> Shadow:
    """Idempotent slice whose algebra acts on the drawn-right boundary of P."""
    if P.mirror:
        full = half_slots(P.m)
        return _idem(P.m, full - P.xi_targets, full - P.omega_sources)
    return _idem(P.n, P.xi_sources, P.omega_targets)


def wedge_compatible(P1: Shadow, P2: Shadow) -> bool:
    """True when the ordered pair glues along its shared boundary line.

    Exactly one slice must be a mirror, and on the shared side the segment
    endpoint sets of the two slices must be complementary.
    """
    if P1.mirror and not P2.mirror:
        if P1.m != P2.m:
            return False
        full = half_slots(P1.m)
        return (
            P1.xi_targets == full - P2.xi_targets
            and P1.omega_sources == full - P2.omega_sources
        )
    if not P1.mirror and P2.mirror:
        if P1.n != P2.n:
            return False
        full = half_slots(P1.n)
        return (
            P1.xi_sources == full - P2.xi_sources
            and P1.omega_targets == full - P2.omega_targets
        )
    return False


def left_contractible(P: Shadow) -> bool:
    """True for a mirror slice whose drawn-left boundary is all turns."""
    if not P.mirror:
        return False
    full = half_slots(P.n)
    return P.xi_sources == full and P.omega_targets == full


def right_contractible(P: Shadow) -> bool:
    """True for a mirror slice whose drawn-right boundary is all turns."""
    if not P.mirror:
        return False
    full = half_slots(P.m)
    return P.xi_targets == full and P.omega_sources == full


def shadow_to_json(P: Shadow) -> dict:
    """Plain-JSON record for fixtures."""
    return {
        "m": P.m,
        "n": P.n,
        "xi": [list(p) for p in P.xi],
        "omega": [list(p) for p in P.omega],
        "mirror": P.mirror,
    }


def shadow_from_json(data: dict) -> Shadow:
    """Inverse of shadow_to_json."""
    return make_shadow(
        data["m"],
        data["n"],
        data["xi"],
        data["omega"],
        bool(data.get("mirror", False)),
    )
