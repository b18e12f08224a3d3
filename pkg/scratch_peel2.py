"""Scratch: peel validation on unknot and trefoil folds."""
import time
from collections import Counter

from tanglehfk.compiler import parse_tangle, compile_tangle
from tanglehfk.wedge import WedgeSequence, build_structure
from tanglehfk.tensor import (
    box_tensor,
    reduce_structure,
    peel_all_factors,
    split_all_factors,
    pair_sequence,
)

UNKNOT = "signs: ; slices: cup(1,+-) cap(1)"
RII = "signs: ; slices: cup(1,+-) x+(1) x-(1) cap(1)"
TREFOIL = "signs: ; slices: cup(1,+-) cup(3,+-) x+(2) x+(2) x+(2) cap(2) cap(1)"


def slice_structures(word_text, keep_u):
    word = parse_tangle(word_text)
    ct = compile_tangle(word)
    seq = ct.sequence
    out = []
    for j, P in enumerate(seq.slices):
        sub = WedgeSequence(
            (P,),
            contract_left=seq.contract_left and j == 0,
            contract_right=seq.contract_right and j == len(seq.slices) - 1,
        )
        out.append(build_structure(sub, keep_u=keep_u))
    return ct, out


def table_of(S):
    t = Counter()
    for g in S.generators:
        grd = S.gradings[g]
        t[(grd.maslov, grd.alexander2)] += 1
    return dict(t)


def run(label, text):
    t0 = time.time()
    ct, slices = slice_structures(text, keep_u=True)
    res = pair_sequence(slices)
    S = res.structure
    print(
        f"{label}: k_total={ct.k_total} comps={ct.num_components}"
        f" closed={ct.num_closed_components}"
    )
    print(
        f"  core {len(S.generators)} gens, v={res.v_splits} w={res.w_splits},"
        f" table={table_of(S)}  [{time.time()-t0:.1f}s]"
    )
    units = sum(
        1 for ts in S.delta.values() for t in ts if t[1].is_unit
    )
    print(f"  core residual delta terms: {sum(len(ts) for ts in S.delta.values())} (unit {units})")


run("unknot", UNKNOT)
run("rii", RII)

print()
print("trefoil fold-by-fold (minus mode with peeling):")
ct, slices = slice_structures(TREFOIL, keep_u=True)
t0 = time.time()
acc = slices[0]
from tanglehfk.tensor import _reducible

v_total = 0
for i, nxt in enumerate(slices[1:], start=1):
    acc = box_tensor(acc, nxt)
    raw = len(acc.generators)
    note = f"fold {i}: raw {raw}"
    if _reducible(acc):
        acc = reduce_structure(acc)
        note += f" -> red {len(acc.generators)}"
        acc, peeled = peel_all_factors(acc)
        v_total += peeled
        note += f" -> peel {len(acc.generators)} (+{peeled}v)"
        acc, more = split_all_factors(acc)
        note += f" -> split {len(acc.generators)} {dict(more)}"
    print(note + f"  [{time.time()-t0:.1f}s]")
print(f"total peels {v_total}, final table {table_of(acc)}")
