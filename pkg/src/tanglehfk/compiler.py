"""Tangle words compiled to alternating slice sequences.

Conventions
-----------
A tangle word lists elementary moves read left to right, each acting on
the current strand heights (1 = bottom): straight keeps every strand,
x+(i) and x-(i) cross the strands at heights i and i+1 (the rising
strand passes over for x+ and under for x-), cap(i) joins the strands at
heights i and i+1, and cup(i,+-) or cup(i,-+) inserts two new strands at
heights i and i+1 with the given orientations.  A sign string fixes the
left boundary orientations, empty for a side with no endpoints; signs
propagate through the moves (crossings swap two signs, cups insert an
opposite pair, caps consume one).

Every move splits into a reflected slice followed by a plain slice.  The
piece carrying the move's geometry is the plain slice for x+ and for
cups, and the reflected slice for x- and for caps; the partner piece is
straight strands, with one unmarked gap slot facing the turn of a cup or
cap.  Reflected slices store the move read right to left, so their sign
data is negated; this is exactly what makes consecutive slices share
each boundary line with complementary markings.  A final cap that closes
the tangle emits only its reflected slice, which is then contractible on
the right.  The compiled sequence is contractible on each closed end.

Each slice contributes its x-segment count to a running total; the total
is the exponent of the two-dimensional factor that relates different
slice sequences for the same tangle, and the final homology is
normalized by it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .shadows import (
    Shadow,
    as_mirror,
    elementary_crossing,
    elementary_cup,
    insert_gap_left,
)
from .wedge import WedgeSequence

_TOKEN_RE = re.compile(
    r"^(?:(straight)|x([+-])\((\d+)\)|(cap)\((\d+)\)|cup\((\d+),([+-]{2})\))$"
)


@dataclass(frozen=True)
class Token:
    """One elementary move of a tangle word."""

    kind: str
    i: int = 0
    signs: tuple[int, ...] = ()

    def __str__(self) -> str:
        if self.kind == "straight":
            return "straight"
        if self.kind == "cross_pos":
            return f"x+({self.i})"
        if self.kind == "cross_neg":
            return f"x-({self.i})"
        if self.kind == "cap":
            return f"cap({self.i})"
        word = "".join("+" if s > 0 else "-" for s in self.signs)
        return f"cup({self.i},{word})"


@dataclass(frozen=True)
class TangleWord:
    """A validated move list with its left boundary signs."""

    left_signs: tuple[int, ...]
    tokens: tuple[Token, ...]


@dataclass(frozen=True)
class CompiledTangle:
    """A slice sequence for a tangle word, with closure bookkeeping."""

    sequence: WedgeSequence
    k_total: int
    num_components: int
    num_closed_components: int


def _parse_signs(text: str) -> tuple[int, ...]:
    text = text.strip()
    if any(c not in "+-" for c in text):
        raise ValueError(f"signs must be over +-: {text!r}")
    return tuple(1 if c == "+" else -1 for c in text)


def parse_token(text: str) -> Token:
    m = _TOKEN_RE.match(text)
    if m is None:
        raise ValueError(f"unrecognized move: {text!r}")
    if m.group(1):
        return Token("straight")
    if m.group(2):
        kind = "cross_pos" if m.group(2) == "+" else "cross_neg"
        return Token(kind, int(m.group(3)))
    if m.group(4):
        return Token("cap", int(m.group(5)))
    return Token("cup", int(m.group(6)), _parse_signs(m.group(7)))


def advance_signs(signs: tuple[int, ...], tok: Token) -> tuple[int, ...]:
    """Signs after one move; raises on any inconsistency."""
    k = len(signs)
    if tok.kind == "straight":
        if k == 0:
            raise ValueError("straight move needs at least one strand")
        return signs
    if tok.kind in ("cross_pos", "cross_neg"):
        if not 1 <= tok.i <= k - 1:
            raise ValueError(f"crossing height {tok.i} outside 1..{k - 1}")
        out = list(signs)
        out[tok.i - 1], out[tok.i] = out[tok.i], out[tok.i - 1]
        return tuple(out)
    if tok.kind == "cap":
        if not 1 <= tok.i <= k - 1:
            raise ValueError(f"cap height {tok.i} outside 1..{k - 1}")
        if signs[tok.i - 1] * signs[tok.i] != -1:
            raise ValueError("cap strands must have opposite orientations")
        return signs[: tok.i - 1] + signs[tok.i + 1 :]
    if tok.kind == "cup":
        if not 1 <= tok.i <= k + 1:
            raise ValueError(f"cup height {tok.i} outside 1..{k + 1}")
        if len(tok.signs) != 2 or tok.signs[0] * tok.signs[1] != -1:
            raise ValueError("cup needs two opposite orientations")
        return signs[: tok.i - 1] + tok.signs + signs[tok.i - 1 :]
    raise ValueError(f"unknown move kind {tok.kind!r}")


def sign_states(word: TangleWord) -> list[tuple[int, ...]]:
    """Sign state before the first move and after every move."""
    states = [word.left_signs]
    for tok in word.tokens:
        states.append(advance_signs(states[-1], tok))
    return states


def parse_tangle(text: str) -> TangleWord:
    """Parse and validate the 'signs: ...; slices: ...' word format."""
    fields: dict[str, str] = {}
    for part in re.split(r"[;\n]", text):
        part = part.strip()
        if not part:
            continue
        key, _, value = part.partition(":")
        if not _:
            raise ValueError(f"expected 'name: value', got {part!r}")
        fields[key.strip()] = value.strip()
    extra = set(fields) - {"signs", "slices"}
    if extra:
        raise ValueError(f"unknown fields: {sorted(extra)}")
    if "slices" not in fields:
        raise ValueError("missing slices")
    word = TangleWord(
        _parse_signs(fields.get("signs", "")),
        tuple(parse_token(t) for t in fields["slices"].split()),
    )
    if not word.tokens:
        raise ValueError("empty move list")
    sign_states(word)
    return word


def word_from_json(data: dict) -> TangleWord:
    """The JSON form: {'signs': '+-', 'slices': ['cup(1,+-)', ...]}."""
    word = TangleWord(
        _parse_signs(data.get("signs", "")),
        tuple(parse_token(t) for t in data["slices"]),
    )
    if not word.tokens:
        raise ValueError("empty move list")
    sign_states(word)
    return word


def _neg(signs: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(-s for s in signs)


def straight_shadow(signs: tuple[int, ...]) -> Shadow:
    """Parallel strands with the given orientations; valid when empty."""
    xi = tuple((j, j) for j, s in enumerate(signs, 1) if s == -1)
    omega = tuple((j, j) for j, s in enumerate(signs, 1) if s == 1)
    k = len(signs)
    return Shadow(k + 1, k + 1, xi, omega, False)


def decompose_elementary(
    tok: Token, signs: tuple[int, ...], final: bool = False
) -> tuple[Shadow, ...]:
    """The reflected/plain slice pair of one move at the given state.

    A final cap that empties the strand set yields a single reflected
    slice instead.
    """
    after = advance_signs(signs, tok)
    if tok.kind == "straight":
        return (as_mirror(straight_shadow(_neg(signs))), straight_shadow(signs))
    if tok.kind == "cross_pos":
        return (
            as_mirror(straight_shadow(_neg(signs))),
            elementary_crossing(signs, tok.i + 1),
        )
    if tok.kind == "cross_neg":
        return (
            as_mirror(elementary_crossing(_neg(after), tok.i + 1)),
            straight_shadow(after),
        )
    if tok.kind == "cup":
        return (
            as_mirror(insert_gap_left(straight_shadow(_neg(signs)), tok.i)),
            elementary_cup(after, tok.i),
        )
    if tok.kind == "cap":
        reflected = as_mirror(elementary_cup(_neg(signs), tok.i))
        if final and not after:
            return (reflected,)
        return (reflected, insert_gap_left(straight_shadow(after), tok.i))
    raise ValueError(f"unknown move kind {tok.kind!r}")


def _line_endpoints(P: Shadow, side: str):
    """(slot, segment id) pairs on the drawn-left or drawn-right line of P.

    Segment ids are ('x'|'o', slice-local index); a plain slice draws its
    larger-index line on the left, a reflected slice on the right.
    """
    out = []
    on_m_line = P.mirror == (side == "right")
    for idx, (a, b) in enumerate(P.xi):
        out.append((b if on_m_line else a, ("x", idx)))
    for idx, (a, b) in enumerate(P.omega):
        out.append((a if on_m_line else b, ("o", idx)))
    return out


def _trace_components(seq: WedgeSequence) -> tuple[int, int]:
    """(components, closed components) of the drawn tangle.

    Segments sharing a slot on a shared line continue each other; on a
    contracted end every slot is a turn joining two segments of the end
    slice.  Components with an endpoint on an open boundary line count
    as open.
    """
    parent: dict = {}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        parent.setdefault(a, a)
        parent.setdefault(b, b)
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    segments = []
    for j, P in enumerate(seq.slices):
        for idx in range(len(P.xi)):
            segments.append((j, ("x", idx)))
        for idx in range(len(P.omega)):
            segments.append((j, ("o", idx)))
    for s in segments:
        parent.setdefault(s, s)

    open_ends: set = set()
    lines = []
    for j in range(len(seq.slices) - 1):
        lines.append((
            [(slot, (j, seg)) for slot, seg in _line_endpoints(seq.slices[j], "right")]
            + [
                (slot, (j + 1, seg))
                for slot, seg in _line_endpoints(seq.slices[j + 1], "left")
            ],
            False,
        ))
    lines.append((
        [(slot, (0, seg)) for slot, seg in _line_endpoints(seq.slices[0], "left")],
        not seq.contract_left,
    ))
    lines.append((
        [(slot, (len(seq.slices) - 1, seg))
         for slot, seg in _line_endpoints(seq.slices[-1], "right")],
        not seq.contract_right,
    ))
    for endpoints, is_open in lines:
        if is_open:
            open_ends.update(seg for _, seg in endpoints)
            continue
        by_slot: dict = {}
        for slot, seg in endpoints:
            by_slot.setdefault(slot, []).append(seg)
        for slot, segs in by_slot.items():
            if len(segs) != 2:
                raise ValueError(f"boundary slot {slot} is not a join of two segments")
            union(segs[0], segs[1])

    classes = {find(s) for s in segments}
    open_classes = {find(s) for s in open_ends}
    return len(classes), len(classes - open_classes)


def compile_tangle(word: TangleWord) -> CompiledTangle:
    """The alternating slice sequence of a word, with closure bookkeeping."""
    states = sign_states(word)
    slices: list[Shadow] = []
    for idx, tok in enumerate(word.tokens):
        final = idx == len(word.tokens) - 1
        slices.extend(decompose_elementary(tok, states[idx], final=final))
    try:
        seq = WedgeSequence(
            tuple(slices),
            contract_left=not word.left_signs,
            contract_right=not states[-1],
        )
    except ValueError as err:
        raise ValueError(f"compiled slices do not assemble: {err}") from err
    k_total = sum(len(P.xi) for P in seq.slices)
    num, closed = _trace_components(seq)
    return CompiledTangle(seq, k_total, num, closed)
