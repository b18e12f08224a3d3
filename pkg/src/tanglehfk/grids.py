"""Grid diagrams for slices: an independent rectangle-counting model.

Conventions
-----------
All positions use doubled coordinates: curves sit at even integers and
markings at odd integers, so interval tests never tie.  A plain slice
with sizes (m, n) occupies [-2m-2, 0] x [0, 2n+2]: vertical curves at
x = -2s for left heights s, horizontal curves at y = 2t for right
heights t, an x-marking at (-(2t+1), 2s+1) for each x-segment
(s+1/2 -> t+1/2), and an o-marking at (-(2s+1), 2t+1) for each
o-segment.  A mirror slice is the left-right reflection of this picture
in [0, 2m+2] x [0, 2n+2].  A matching (S, T, phi) corresponds to the
point tuple {(-2s, 2 phi s)} (plain) or {(2s, 2 phi s)} (mirror).

A diagram is a row of blocks.  Consecutive blocks share their horizontal
curves (plain block then mirror block, equal heights) or their vertical
curves (mirror then plain, equal widths); the shared family closes into
circles running through both blocks, with two seams, and both boundary
components of that band are identified.  An end block whose free curve
family has an x-marking and an o-marking in every gap between adjacent
curves may be closed onto itself ("self-gluing"), which closes that
family into circles with a single seam.

The differential counts rectangles whose lower-left and upper-right
corners lie on the input tuple; the output replaces them with the other
two corners.  A rectangle may wrap around closed curve families, is
rejected if any other point of the tuple or any x-marking lies in it,
and contributes one U power for each o-marking it covers.  U-variables
are keyed by (block key, o-slot), matching the strand-side convention.
Structure maps on a free boundary count partial rectangles that touch
it, following the same emptiness rules.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, replace
from fractions import Fraction

from .shadows import Shadow
from .strands import Element, Generator, UMonomial

Point = tuple[int, int]


def _mono(exps: dict) -> UMonomial:
    return UMonomial(tuple(exps.items()))


@dataclass(frozen=True)
class GridBlock:
    """One slice drawn as a grid: marking geometry plus a U-key namespace."""

    kind: str
    width: int
    height: int
    xmarks: frozenset[Point]
    omarks: frozenset[Point]
    key: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("shadow", "mirror"):
            raise ValueError(f"unknown block kind {self.kind!r}")
        object.__setattr__(self, "xmarks", frozenset(tuple(p) for p in self.xmarks))
        object.__setattr__(self, "omarks", frozenset(tuple(p) for p in self.omarks))
        for marks in (self.xmarks, self.omarks):
            cols = [x for x, _ in marks]
            rows = [y for _, y in marks]
            if len(set(cols)) != len(cols) or len(set(rows)) != len(rows):
                raise ValueError("at most one x-marking and one o-marking per line")
            for x, y in marks:
                if x % 2 == 0 or y % 2 == 0:
                    raise ValueError("markings must sit at odd coordinates")
                if not (0 < y < 2 * self.height + 2) or not self._x_in_range(x):
                    raise ValueError("marking outside the block")

    def _x_in_range(self, x: int) -> bool:
        if self.kind == "shadow":
            return -2 * self.width - 2 < x < 0
        return 0 < x < 2 * self.width + 2

    @property
    def xmark_cols(self) -> frozenset[int]:
        return frozenset((abs(x) - 1) // 2 for x, _ in self.xmarks)

    @property
    def xmark_rows(self) -> frozenset[int]:
        return frozenset((y - 1) // 2 for _, y in self.xmarks)

    @property
    def omark_cols(self) -> frozenset[int]:
        return frozenset((abs(x) - 1) // 2 for x, _ in self.omarks)

    @property
    def omark_rows(self) -> frozenset[int]:
        return frozenset((y - 1) // 2 for _, y in self.omarks)

    def o_key(self, opoint: Point) -> tuple[int, int]:
        """U-key of an o-marking: (block key, left half-height of its o-segment)."""
        return (self.key, (abs(opoint[0]) - 1) // 2)

    def point_of_pair(self, s: int, t: int) -> Point:
        x = -2 * s if self.kind == "shadow" else 2 * s
        return (x, 2 * t)

    def pair_of_point(self, p: Point) -> tuple[int, int]:
        return (abs(p[0]) // 2, p[1] // 2)


def _half(size: int) -> frozenset[int]:
    return frozenset(range(1, size))


@dataclass(frozen=True)
class GridDiagram:
    """A row of grid blocks with shared curve families between neighbours."""

    blocks: tuple[GridBlock, ...]
    closed_start: bool = False
    closed_end: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not self.blocks:
            raise ValueError("a diagram needs at least one block")
        for i in range(len(self.blocks) - 1):
            kind = self.seam_kind(i)
            a, b = self.blocks[i], self.blocks[i + 1]
            if kind == "rows":
                if a.height != b.height:
                    raise ValueError("row-sharing blocks need equal heights")
                full = _half(a.height)
                pairs = [
                    (a.xmark_rows, b.xmark_rows),
                    (a.omark_rows, b.omark_rows),
                ]
            else:
                if a.width != b.width:
                    raise ValueError("column-sharing blocks need equal widths")
                full = _half(a.width)
                pairs = [
                    (a.xmark_cols, b.xmark_cols),
                    (a.omark_cols, b.omark_cols),
                ]
            for left, right in pairs:
                if left & right or left | right != full:
                    raise ValueError(
                        "shared annuli need exactly one x-marking and one o-marking"
                    )
        if self.closed_start and not self._self_closable(0, "rows"):
            raise ValueError("first block cannot close its rows onto itself")
        if self.closed_end and not self._self_closable(len(self.blocks) - 1, "cols"):
            raise ValueError("last block cannot close its columns onto itself")
        if self.closed_start and self.closed_end and len(self.blocks) == 1:
            raise ValueError("a single block cannot close both families")

    def _self_closable(self, i: int, family: str) -> bool:
        blk = self.blocks[i]
        if blk.kind != "mirror":
            return False
        if family == "rows":
            if i > 0 or (len(self.blocks) > 1 and self.seam_kind(0) != "cols"):
                return False
            full = _half(blk.height)
            return blk.xmark_rows == full and blk.omark_rows == full
        if i < len(self.blocks) - 1 or (
            len(self.blocks) > 1 and self.seam_kind(i - 1) != "rows"
        ):
            return False
        full = _half(blk.width)
        return blk.xmark_cols == full and blk.omark_cols == full

    def seam_kind(self, i: int) -> str:
        """Which curve family blocks i and i+1 share: 'rows' or 'cols'."""
        a, b = self.blocks[i].kind, self.blocks[i + 1].kind
        if (a, b) == ("shadow", "mirror"):
            return "rows"
        if (a, b) == ("mirror", "shadow"):
            return "cols"
        raise ValueError("adjacent blocks must alternate plain and mirror")

    @property
    def glued_edges(self) -> tuple[str, ...]:
        out = []
        if self.closed_start:
            out.append("self:0:rows")
        for i in range(len(self.blocks) - 1):
            out.append(f"pair:{i}-{i + 1}:{self.seam_kind(i)}")
        if self.closed_end:
            out.append(f"self:{len(self.blocks) - 1}:cols")
        return tuple(out)

    def _single(self) -> GridBlock:
        if len(self.blocks) != 1:
            raise ValueError("geometry fields refer to single-block diagrams")
        return self.blocks[0]

    @property
    def width(self) -> int:
        return self._single().width

    @property
    def height(self) -> int:
        return self._single().height

    @property
    def kind(self) -> str:
        return self._single().kind

    @property
    def alpha_rows(self) -> tuple[int, ...]:
        return tuple(range(1, self._single().height + 1))

    @property
    def beta_cols(self) -> tuple[int, ...]:
        return tuple(range(1, self._single().width + 1))

    @property
    def Xs(self) -> frozenset[Point]:
        return self._single().xmarks

    @property
    def Os(self) -> frozenset[Point]:
        return self._single().omarks

    @property
    def boundary_markers(self) -> tuple[tuple[str, Point], ...]:
        """Basepoints on the free edges marking where strands enter and leave."""
        blk = self._single()
        sgn = -1 if blk.kind == "shadow" else 1
        out = []
        for s in sorted(blk.omark_cols - blk.xmark_cols):
            out.append(("x", (sgn * (2 * s + 1), 0)))
        for s in sorted(blk.omark_rows - blk.xmark_rows):
            out.append(("x", (0, 2 * s + 1)))
        for s in sorted(blk.xmark_cols - blk.omark_cols):
            out.append(("o", (sgn * (2 * s + 1), 0)))
        for s in sorted(blk.xmark_rows - blk.omark_rows):
            out.append(("o", (0, 2 * s + 1)))
        return tuple(out)


def shadow_to_grid(P: Shadow, key: int = 0) -> GridDiagram:
    """The grid block of a slice, in standard position for its mirror flag."""
    if P.mirror:
        xmarks = frozenset((2 * t + 1, 2 * s + 1) for s, t in P.xi)
        omarks = frozenset((2 * s + 1, 2 * t + 1) for s, t in P.omega)
        blk = GridBlock("mirror", P.m, P.n, xmarks, omarks, key)
    else:
        xmarks = frozenset((-(2 * t + 1), 2 * s + 1) for s, t in P.xi)
        omarks = frozenset((-(2 * s + 1), 2 * t + 1) for s, t in P.omega)
        blk = GridBlock("shadow", P.m, P.n, xmarks, omarks, key)
    return GridDiagram((blk,))


def glue_grids(G1: GridDiagram, G2: GridDiagram, edge: str | None = None) -> GridDiagram:
    """Join two diagrams along the shared curve family of their facing ends."""
    if G1.closed_end or G2.closed_start:
        raise ValueError("cannot glue onto a self-closed end")
    joined = GridDiagram(
        G1.blocks + G2.blocks, closed_start=G1.closed_start, closed_end=G2.closed_end
    )
    if edge is not None and joined.seam_kind(len(G1.blocks) - 1) != edge:
        raise ValueError(f"facing ends do not share {edge}")
    return joined


def self_glue(G: GridDiagram, edge: str) -> GridDiagram:
    """Close the free curve family of an end block onto itself."""
    if edge == "rows":
        return replace(G, closed_start=True)
    if edge == "cols":
        return replace(G, closed_end=True)
    raise ValueError("edge must be 'rows' or 'cols'")


def sequence_to_grid(
    shadows,
    keys=None,
    close_start: bool = False,
    close_end: bool = False,
) -> GridDiagram:
    """The plumbed diagram of a wedge-compatible run of slices."""
    shadows = list(shadows)
    if keys is None:
        keys = list(range(len(shadows)))
    blocks = [shadow_to_grid(P, key).blocks[0] for P, key in zip(shadows, keys)]
    return GridDiagram(tuple(blocks), closed_start=close_start, closed_end=close_end)


@dataclass(frozen=True)
class GridGenerator:
    """A tuple of curve intersection points, one frozenset per block."""

    points: tuple[frozenset[Point], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "points", tuple(frozenset(tuple(p) for p in pts) for pts in self.points)
        )

    def replace_points(self, block: int, drop, put) -> "GridGenerator":
        pts = list(self.points)
        pts[block] = pts[block] - frozenset(drop)
        return GridGenerator(
            tuple(
                pts[i] | frozenset(p for b, p in put if b == i)
                for i in range(len(pts))
            )
        )


def gen_to_grid(G: GridDiagram, gens) -> GridGenerator:
    """The point tuple of a run of matchings, one per block."""
    if isinstance(gens, Generator):
        gens = (gens,)
    if len(gens) != len(G.blocks):
        raise ValueError("one matching per block")
    return GridGenerator(
        tuple(
            frozenset(blk.point_of_pair(s, t) for s, t in g.pairs)
            for blk, g in zip(G.blocks, gens)
        )
    )


def grid_to_gen(G: GridDiagram, x: GridGenerator) -> tuple[Generator, ...]:
    """The matchings read off a point tuple."""
    return tuple(
        Generator(tuple(blk.pair_of_point(p) for p in sorted(pts)))
        for blk, pts in zip(G.blocks, x.points)
    )


def enumerate_grid_generators(G: GridDiagram) -> list[GridGenerator]:
    """All point tuples: one point per closed curve, at most one per arc."""
    per_block = []
    for blk in G.blocks:
        cands = []
        cols = range(1, blk.width + 1)
        rows = range(1, blk.height + 1)
        for k in range(min(blk.width, blk.height) + 1):
            for cs in itertools.combinations(cols, k):
                for ts in itertools.permutations(rows, k):
                    pts = frozenset(
                        blk.point_of_pair(s, t) for s, t in zip(cs, ts)
                    )
                    cands.append((frozenset(cs), frozenset(ts), pts))
        per_block.append(cands)

    out: list[tuple] = [()]
    for i, cands in enumerate(per_block):
        blk = G.blocks[i]
        nxt = []
        for partial in out:
            for cs, ts, pts in cands:
                if i == 0 and G.closed_start and ts != frozenset(range(1, blk.height + 1)):
                    continue
                if i > 0:
                    pcs, pts_rows = partial[-1][0], partial[-1][1]
                    if G.seam_kind(i - 1) == "rows":
                        if pts_rows & ts or pts_rows | ts != frozenset(
                            range(1, blk.height + 1)
                        ):
                            continue
                    else:
                        if pcs & cs or pcs | cs != frozenset(range(1, blk.width + 1)):
                            continue
                if (
                    i == len(per_block) - 1
                    and G.closed_end
                    and cs != frozenset(range(1, blk.width + 1))
                ):
                    continue
                nxt.append(partial + ((cs, ts, pts),))
        out = nxt
    return [GridGenerator(tuple(entry[2] for entry in tup)) for tup in out]


def _annuli(G: GridDiagram):
    """Closed curve families: cyclic charts over their one or two blocks.

    Each annulus is a dict with members (block indices), period, seam
    positions, fwd(block, point) -> (cyclic, linear), and
    back(cyclic, linear) -> (block, point).
    """
    out = []
    if G.closed_start:
        blk = G.blocks[0]
        out.append(
            {
                "members": (0,),
                "period": 2 * blk.width + 2,
                "seams": (0,),
                "fwd": lambda b, p: (p[0], p[1]),
                "back": lambda c, l: (0, (c, l)),
            }
        )
    for i in range(len(G.blocks) - 1):
        a, b = G.blocks[i], G.blocks[i + 1]
        if G.seam_kind(i) == "rows":
            shift = 2 * a.width + 2
            period = shift + 2 * b.width + 2

            def fwd(blk, p, _shift=shift):
                return (p[0] + _shift, p[1])

            def back(c, l, _shift=shift, _i=i):
                return (_i if c < _shift else _i + 1, (c - _shift, l))

        else:
            shift = 2 * a.height + 2
            period = shift + 2 * b.height + 2

            def fwd(blk, p, _shift=shift, _i=i, _period=period):
                if blk == _i:
                    return (p[1], p[0])
                return (_period - p[1], -p[0])

            def back(c, l, _shift=shift, _i=i, _period=period):
                if c < _shift:
                    return (_i, (l, c))
                return (_i + 1, (-l, _period - c))

        out.append(
            {
                "members": (i, i + 1),
                "period": period,
                "seams": (0, shift),
                "fwd": fwd,
                "back": back,
            }
        )
    if G.closed_end:
        last = len(G.blocks) - 1
        blk = G.blocks[last]
        out.append(
            {
                "members": (last,),
                "period": 2 * blk.height + 2,
                "seams": (0,),
                "fwd": lambda b, p: (p[1], p[0]),
                "back": lambda c, l, _last=last: (_last, (l, c)),
            }
        )
    return out


def _rectangles(G: GridDiagram, x: GridGenerator):
    """All rectangles out of x: yields (exps, n_x, output generator).

    exps maps U-keys to exponents and n_x counts covered x-markings;
    the differential keeps only rectangles with n_x == 0.
    """
    for bi, blk in enumerate(G.blocks):
        pts = sorted(x.points[bi])
        for p, q in itertools.combinations(pts, 2):
            if (p[0] - q[0]) * (p[1] - q[1]) <= 0:
                continue
            x1, x2 = min(p[0], q[0]), max(p[0], q[0])
            y1, y2 = min(p[1], q[1]), max(p[1], q[1])
            inside = lambda r: x1 <= r[0] <= x2 and y1 <= r[1] <= y2
            if any(inside(r) for r in pts if r not in (p, q)):
                continue
            n_x = sum(1 for r in blk.xmarks if inside(r))
            exps: dict = {}
            for r in blk.omarks:
                if inside(r):
                    key = blk.o_key(r)
                    exps[key] = exps.get(key, 0) + 1
            y = x.replace_points(
                bi, (p, q), ((bi, (p[0], q[1])), (bi, (q[0], p[1])))
            )
            yield exps, n_x, y

    for ann in _annuli(G):
        period = ann["period"]
        fwd = ann["fwd"]
        charted = [
            (fwd(b, p), b, p) for b in ann["members"] for p in x.points[b]
        ]
        for (cp, lp), bp, pp in charted:
            for (cq, lq), bq, pq in charted:
                if lp >= lq:
                    continue
                d = (cq - cp) % period
                if not any(0 < (s - cp) % period < d for s in ann["seams"]):
                    continue
                cyc_in = lambda c: (c - cp) % period <= d
                lin_in = lambda l: lp <= l <= lq
                ok = True
                for (cr, lr), br, pr in charted:
                    if (br, pr) in ((bp, pp), (bq, pq)):
                        continue
                    if cyc_in(cr) and lin_in(lr):
                        ok = False
                        break
                if not ok:
                    continue
                n_x = 0
                exps = {}
                for b in ann["members"]:
                    for r in G.blocks[b].xmarks:
                        c, l = fwd(b, r)
                        if cyc_in(c) and lin_in(l):
                            n_x += 1
                    for r in G.blocks[b].omarks:
                        c, l = fwd(b, r)
                        if cyc_in(c) and lin_in(l):
                            key = G.blocks[b].o_key(r)
                            exps[key] = exps.get(key, 0) + 1
                new_p = ann["back"](cp % period, lq)
                new_q = ann["back"](cq % period, lp)
                y = GridGenerator(
                    tuple(
                        (x.points[i] - {pp if i == bp else None, pq if i == bq else None})
                        | frozenset(pt for b, pt in (new_p, new_q) if b == i)
                        for i in range(len(G.blocks))
                    )
                )
                yield exps, n_x, y


def grid_differential(G: GridDiagram, x: GridGenerator, *, keep_u: bool = True) -> Element:
    """Count empty rectangles out of x, one U power per covered o-marking."""
    out: set = set()
    for exps, n_x, y in _rectangles(G, x):
        if n_x:
            continue
        mono = _mono(exps)
        if not keep_u and not mono.is_unit:
            continue
        out ^= {(mono, y)}
    return frozenset(out)


def _box_hits(box, pts) -> bool:
    x1, x2, y1, y2 = box
    return any(x1 <= px <= x2 and y1 <= py <= y2 for px, py in pts)


def _typeA_right_block(blk: GridBlock, pts: frozenset[Point], r: Generator, keep_u: bool):
    """Right action on a plain block: partial rectangles at the vertical edges."""
    if blk.kind != "shadow":
        raise ValueError("the right action reads a plain block")
    phi = {abs(px) // 2: py // 2 for px, py in pts}
    rows = frozenset(phi.values())
    if r.S != rows:
        return frozenset()
    col_of_row = {t: s for s, t in phi.items()}
    boxes = []
    moved = []
    for t, rt in r.pairs:
        if t == rt:
            continue
        s = col_of_row[t]
        if rt > t:
            boxes.append(("right", (-2 * s, 0, 2 * t, 2 * rt)))
        else:
            boxes.append(("left", (-2 * blk.width - 2, -2 * s, 2 * rt, 2 * t)))
        moved.append((-2 * s, 2 * t))
    fixed = pts - frozenset(moved)
    for _, box in boxes:
        if _box_hits(box, blk.xmarks) or _box_hits(box, fixed):
            return frozenset()
    for (tag_a, a), (tag_b, b) in itertools.combinations(boxes, 2):
        if (
            a[0] >= b[0] and a[1] <= b[1] and a[2] >= b[2] and a[3] <= b[3]
        ) or (b[0] >= a[0] and b[1] <= a[1] and b[2] >= a[2] and b[3] <= a[3]):
            return frozenset()
        if tag_a != tag_b:
            if a[0] < b[1] and b[0] < a[1] and a[2] < b[3] and b[2] < a[3]:
                return frozenset()
    exps: dict = {}
    for om in blk.omarks:
        if any(_box_hits(box, (om,)) for _, box in boxes):
            key = blk.o_key(om)
            exps[key] = exps.get(key, 0) + 1
    mono = _mono(exps)
    if not keep_u and not mono.is_unit:
        return frozenset()
    rho = dict(r.pairs)
    y = frozenset((-2 * s, 2 * rho[t]) for s, t in phi.items())
    return frozenset({(mono, y)})


def _antitranspose_block(blk: GridBlock) -> GridBlock:
    """Reflect a plain block across the falling diagonal; stays plain."""
    flip = lambda marks: frozenset((-y, -x) for x, y in marks)
    return GridBlock(
        "shadow", blk.height, blk.width, flip(blk.xmarks), flip(blk.omarks), blk.key
    )


def _transpose_block(blk: GridBlock) -> GridBlock:
    """Reflect a mirror block across the rising diagonal; stays mirror."""
    flip = lambda marks: frozenset((y, x) for x, y in marks)
    return GridBlock(
        "mirror", blk.height, blk.width, flip(blk.xmarks), flip(blk.omarks), blk.key
    )


def _omark_rekey(blk: GridBlock) -> dict:
    """Keys of the reflected block translated back to the original o-slots."""
    table = {}
    for x, y in blk.omarks:
        s, t = (abs(x) - 1) // 2, (y - 1) // 2
        table[(blk.key, t)] = (blk.key, s)
    return table


def grid_typeA_action(
    G: GridDiagram, x: GridGenerator, r: Generator, side: str, *, keep_u: bool = True
) -> Element:
    """Multiply a plain-block generator by an edge algebra element.

    The right action moves points vertically with partial rectangles
    touching the vertical edges; the left action is the same count in the
    diagonally reflected block.
    """
    blk = G._single()
    pts = x.points[0]
    if side == "right":
        terms = _typeA_right_block(blk, pts, r, keep_u)
        return frozenset((m, GridGenerator((y,))) for m, y in terms)
    if side != "left":
        raise ValueError("side must be 'left' or 'right'")
    flipped = _antitranspose_block(blk)
    xq = frozenset((-y, -x) for x, y in pts)
    rq = Generator(tuple((t, s) for s, t in r.pairs))
    table = _omark_rekey(blk)
    out = set()
    for mono, yq in _typeA_right_block(flipped, xq, rq, keep_u):
        y = frozenset((-b, -a) for a, b in yq)
        out.add((mono.rekey(table), GridGenerator((y,))))
    return frozenset(out)


def _typeD_left_block(blk: GridBlock, pts: frozenset[Point], algebra_key: int, keep_u: bool):
    """Left boundary map on a mirror block: four partial-rectangle shapes.

    A point may slide down next to the left edge or up next to the right
    edge while a complementary algebra strand moves the other way; an
    algebra strand may cross over a full-width band of unoccupied rows;
    or a wrap-around band may trade the rows of two points, provided the
    missing middle is fully populated.  Uncovered o-gaps of a wrapping
    band contribute U powers on the algebra side.
    """
    if blk.kind != "mirror":
        raise ValueError("the boundary map reads a mirror block")
    if algebra_key == blk.key:
        raise ValueError("algebra key must differ from the block key")
    m, n = blk.width, blk.height
    phi = {px // 2: py // 2 for px, py in pts}
    rows = frozenset(phi.values())
    spare = sorted(frozenset(range(1, n + 1)) - rows)
    terms = []

    def emit(r_pairs, box_list, mover_drop, mover_put, extra=None):
        exps: dict = {}
        for om in blk.omarks:
            if any(_box_hits(box, (om,)) for box in box_list):
                key = blk.o_key(om)
                exps[key] = exps.get(key, 0) + 1
        for key, e in (extra or {}).items():
            exps[key] = exps.get(key, 0) + e
        mono = _mono(exps)
        if not keep_u and not mono.is_unit:
            return
        y = (pts - frozenset(mover_drop)) | frozenset(mover_put)
        terms.append((Generator(tuple(sorted(r_pairs))), mono, y))

    for s, t2 in sorted(phi.items()):
        p = (2 * s, 2 * t2)
        for t1 in spare:
            if t1 < t2:
                box = (0, 2 * s, 2 * t1, 2 * t2)
                if _box_hits(box, blk.xmarks) or _box_hits(box, pts - {p}):
                    continue
                r_pairs = [(t1, t2)] + [(u, u) for u in spare if u != t1]
                emit(r_pairs, [box], [p], [(2 * s, 2 * t1)])
            else:
                box = (2 * s, 2 * m + 2, 2 * t2, 2 * t1)
                if _box_hits(box, blk.xmarks) or _box_hits(box, pts - {p}):
                    continue
                r_pairs = [(t1, t2)] + [(u, u) for u in spare if u != t1]
                emit(r_pairs, [box], [p], [(2 * s, 2 * t1)])

    for t1, t2 in itertools.combinations(spare, 2):
        box = (0, 2 * m + 2, 2 * t1, 2 * t2)
        if _box_hits(box, blk.xmarks) or _box_hits(box, pts):
            continue
        r_pairs = [(t1, t2), (t2, t1)] + [(u, u) for u in spare if u not in (t1, t2)]
        emit(r_pairs, [box], [], [])

    omark_row_set = blk.omark_rows
    for s1, s2 in itertools.combinations(sorted(phi), 2):
        t1, t2 = phi[s2], phi[s1]
        if t1 >= t2:
            continue
        left = (0, 2 * s1, 2 * t1, 2 * t2)
        right = (2 * s2, 2 * m + 2, 2 * t1, 2 * t2)
        p1, p2 = (2 * s1, 2 * t2), (2 * s2, 2 * t1)
        others = pts - {p1, p2}
        if _box_hits(left, blk.xmarks) or _box_hits(right, blk.xmarks):
            continue
        if _box_hits(left, others) or _box_hits(right, others):
            continue
        mid_x = {
            (y - 1) // 2
            for xx, y in blk.xmarks
            if 2 * s1 <= xx <= 2 * s2 and 2 * t1 <= y <= 2 * t2
        }
        if mid_x != set(range(t1, t2)):
            continue
        mid_pts = {
            y // 2 for xx, y in pts if 2 * s1 <= xx <= 2 * s2 and 2 * t1 <= y <= 2 * t2
        }
        if mid_pts != set(range(t1, t2 + 1)):
            continue
        extra = {
            (algebra_key, h): 1 for h in range(t1, t2) if h not in omark_row_set
        }
        r_pairs = [(u, u) for u in spare]
        emit(
            r_pairs,
            [left, right],
            [p1, p2],
            [(2 * s1, 2 * t1), (2 * s2, 2 * t2)],
            extra,
        )
    return terms


def grid_typeD_map(
    G: GridDiagram,
    x: GridGenerator,
    side: str,
    *,
    algebra_key: int = -1,
    keep_u: bool = True,
) -> list[tuple[Generator, UMonomial, GridGenerator]]:
    """Boundary-touching terms of the mirror-block structure map.

    Returns (algebra generator, U monomial, output tuple) triples; the
    full structure map adds the interior rectangle terms with identity
    algebra factors on both sides.
    """
    blk = G._single()
    pts = x.points[0]
    if side == "left":
        terms = _typeD_left_block(blk, pts, algebra_key, keep_u)
        return [(r, mono, GridGenerator((y,))) for r, mono, y in terms]
    if side != "right":
        raise ValueError("side must be 'left' or 'right'")
    flipped = _transpose_block(blk)
    xq = frozenset((y, xx) for xx, y in pts)
    table = _omark_rekey(blk)
    out = []
    for r, mono, yq in _typeD_left_block(flipped, xq, algebra_key, keep_u):
        y = frozenset((b, a) for a, b in yq)
        rr = Generator(tuple((t, s) for s, t in r.pairs))
        out.append((rr, mono.rekey(table), GridGenerator((y,))))
    return out


@dataclass(frozen=True)
class ClosedGrid:
    """A toroidal grid: column c carries an X in row x_perm[c], an O in o_perm[c]."""

    x_perm: tuple[int, ...]
    o_perm: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "x_perm", tuple(int(v) for v in self.x_perm))
        object.__setattr__(self, "o_perm", tuple(int(v) for v in self.o_perm))
        n = len(self.x_perm)
        for perm in (self.x_perm, self.o_perm):
            if sorted(perm) != list(range(n)):
                raise ValueError("markings must hit each row and column once")

    @property
    def size(self) -> int:
        return len(self.x_perm)


def closed_grid_components(G: ClosedGrid) -> int:
    """Number of link components: cycles of the column-to-column walk."""
    o_col = {r: c for c, r in enumerate(G.o_perm)}
    seen = set()
    comps = 0
    for c0 in range(G.size):
        if c0 in seen:
            continue
        comps += 1
        c = c0
        while c not in seen:
            seen.add(c)
            c = o_col[G.x_perm[c]]
    return comps


def _closed_tilde_differential(G: ClosedGrid, sigma: tuple[int, ...]):
    """Empty-rectangle outputs on the torus, avoiding every marking."""
    n = G.size
    out = []
    cells = [("x", c, r) for c, r in enumerate(G.x_perm)] + [
        ("o", c, r) for c, r in enumerate(G.o_perm)
    ]
    for i, j in itertools.permutations(range(n), 2):
        dc = (j - i) % n
        dr = (sigma[j] - sigma[i]) % n
        blocked = False
        for k in range(n):
            if k in (i, j):
                continue
            if 0 < (k - i) % n < dc and 0 < (sigma[k] - sigma[i]) % n < dr:
                blocked = True
                break
        if blocked:
            continue
        if any(
            (c - i) % n < dc and (r - sigma[i]) % n < dr for _, c, r in cells
        ):
            continue
        tau = list(sigma)
        tau[i], tau[j] = sigma[j], sigma[i]
        out.append(tuple(tau))
    return out


def _ipairs(A, B) -> int:
    return sum(1 for a in A for b in B if a[0] < b[0] and a[1] < b[1])


def _jpair(A, B) -> Fraction:
    return Fraction(_ipairs(A, B) + _ipairs(B, A), 2)


def _closed_gradings(G: ClosedGrid, sigma) -> tuple[int, int]:
    """(maslov, doubled alexander) in the standard planar chart."""
    n = G.size
    pts = [(2 * i, 2 * sigma[i]) for i in range(n)]
    xs = [(2 * c + 1, 2 * r + 1) for c, r in enumerate(G.x_perm)]
    os_ = [(2 * c + 1, 2 * r + 1) for c, r in enumerate(G.o_perm)]
    maslov = _jpair(pts, pts) - 2 * _jpair(pts, os_) + _jpair(os_, os_) + 1
    ell = closed_grid_components(G)
    alex = (
        _jpair(pts, xs)
        - _jpair(pts, os_)
        - (_jpair(xs, xs) - _jpair(os_, os_)) / 2
        - Fraction(n - ell, 2)
    )
    a2 = 2 * alex
    if maslov.denominator != 1 or a2.denominator != 1:
        raise ArithmeticError("grid gradings must land on the half-integer lattice")
    return int(maslov), int(a2)


def _f2_rank(rows: list[int]) -> int:
    pivots: dict[int, int] = {}
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


def _strip_v_factors(table: dict, times: int) -> dict:
    """Divide a bigraded rank table by (1 + shift(-1,-2)) the given number of times."""
    for _ in range(times):
        groups: dict = {}
        for (mm, a2), rank in table.items():
            groups.setdefault(2 * mm - a2, {})[mm] = rank
        table = {}
        for diag, coeffs in groups.items():
            rem = dict(coeffs)
            quot: dict = {}
            while any(rem.values()):
                top = max(mm for mm, c in rem.items() if c)
                c = rem[top]
                if c < 0:
                    raise ArithmeticError("rank table is not divisible by the pair factor")
                quot[top] = c
                rem[top] = 0
                rem[top - 1] = rem.get(top - 1, 0) - c
            for mm, c in quot.items():
                table[(mm, 2 * mm - diag)] = c
    return table


def closed_grid_hfk(G: ClosedGrid) -> dict[tuple[int, int], int]:
    """Bigraded homology ranks of the closed tilde complex, pair factors stripped.

    Returns {(maslov, doubled alexander): rank}.  The raw homology carries
    size-minus-components extra (0,0)+(-1,-2) factors, which are divided
    out before returning.
    """
    n = G.size
    gens = list(itertools.permutations(range(n)))
    index = {g: i for i, g in enumerate(gens)}
    grading = [_closed_gradings(G, g) for g in gens]

    by_a2: dict[int, dict[int, list[int]]] = {}
    for i, g in enumerate(gens):
        mm, a2 = grading[i]
        by_a2.setdefault(a2, {}).setdefault(mm, []).append(i)

    table: dict[tuple[int, int], int] = {}
    for a2, levels in by_a2.items():
        pos = {
            mm: {gi: c for c, gi in enumerate(ids)} for mm, ids in levels.items()
        }
        ranks: dict[int, int] = {}
        for mm, ids in levels.items():
            rows = []
            for gi in ids:
                row = 0
                for out in _closed_tilde_differential(G, gens[gi]):
                    oi = index[out]
                    omm, oa2 = grading[oi]
                    if oa2 != a2 or omm != mm - 1:
                        raise ArithmeticError("rectangle count breaks the grading")
                    row ^= 1 << pos[mm - 1][oi]
                rows.append(row)
            ranks[mm] = _f2_rank(rows)
        for mm, ids in levels.items():
            h = len(ids) - ranks.get(mm, 0) - ranks.get(mm + 1, 0)
            if h:
                table[(mm, a2)] = h
    return _strip_v_factors(table, n - closed_grid_components(G))


def closed_grid_to_ascii(G: ClosedGrid) -> str:
    """Rows top to bottom; each cell '.', 'X', or 'O'."""
    n = G.size
    lines = []
    for r in range(n - 1, -1, -1):
        row = []
        for c in range(n):
            if G.x_perm[c] == r and G.o_perm[c] == r:
                raise ValueError("cell carries both markings; no ascii form")
            row.append("X" if G.x_perm[c] == r else "O" if G.o_perm[c] == r else ".")
        lines.append("".join(row))
    return "\n".join(lines)


def closed_grid_from_ascii(text: str) -> ClosedGrid:
    lines = [ln for ln in text.strip().splitlines()]
    n = len(lines)
    x_perm = [-1] * n
    o_perm = [-1] * n
    for down, ln in enumerate(lines):
        if len(ln) != n:
            raise ValueError("closed grids must be square")
        r = n - 1 - down
        for c, ch in enumerate(ln):
            if ch == "X":
                x_perm[c] = r
            elif ch == "O":
                o_perm[c] = r
            elif ch != ".":
                raise ValueError(f"unknown cell {ch!r}")
    return ClosedGrid(tuple(x_perm), tuple(o_perm))


def grid_to_ascii(G: GridDiagram) -> str:
    """Single block as cell art: rows top to bottom, '.', 'X', 'O' per cell."""
    blk = G._single()
    xmin = -2 * blk.width - 2 if blk.kind == "shadow" else 0
    lines = []
    for ry in range(blk.height, -1, -1):
        row = []
        for cx in range(blk.width + 1):
            pt = (xmin + 2 * cx + 1, 2 * ry + 1)
            if pt in blk.xmarks:
                row.append("X")
            elif pt in blk.omarks:
                row.append("O")
            else:
                row.append(".")
        lines.append("".join(row))
    return "\n".join(lines)


def grid_from_ascii(kind: str, text: str, key: int = 0) -> GridDiagram:
    lines = text.strip().splitlines()
    height = len(lines) - 1
    width = len(lines[0]) - 1
    xmin = -2 * width - 2 if kind == "shadow" else 0
    xmarks = set()
    omarks = set()
    for down, ln in enumerate(lines):
        if len(ln) != width + 1:
            raise ValueError("ragged ascii grid")
        ry = height - down
        for cx, ch in enumerate(ln):
            pt = (xmin + 2 * cx + 1, 2 * ry + 1)
            if ch == "X":
                xmarks.add(pt)
            elif ch == "O":
                omarks.add(pt)
            elif ch != ".":
                raise ValueError(f"unknown cell {ch!r}")
    return GridDiagram((GridBlock(kind, width, height, frozenset(xmarks), frozenset(omarks), key),))


def grid_to_json(G: GridDiagram) -> str:
    payload = {
        "blocks": [
            {
                "kind": blk.kind,
                "width": blk.width,
                "height": blk.height,
                "key": blk.key,
                "x": sorted(blk.xmarks),
                "o": sorted(blk.omarks),
            }
            for blk in G.blocks
        ],
        "closed_start": G.closed_start,
        "closed_end": G.closed_end,
    }
    return json.dumps(payload, sort_keys=True)


def grid_from_json(text: str) -> GridDiagram:
    payload = json.loads(text)
    blocks = tuple(
        GridBlock(
            b["kind"],
            b["width"],
            b["height"],
            frozenset(tuple(p) for p in b["x"]),
            frozenset(tuple(p) for p in b["o"]),
            b.get("key", 0),
        )
        for b in payload["blocks"]
    )
    return GridDiagram(
        blocks,
        closed_start=payload.get("closed_start", False),
        closed_end=payload.get("closed_end", False),
    )
