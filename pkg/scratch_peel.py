"""Scratch: inspect U-key edge structure of minus-mode fold accumulators."""
from collections import defaultdict

from tanglehfk.compiler import parse_tangle, compile_tangle
from tanglehfk.wedge import WedgeSequence, build_structure
from tanglehfk.tensor import box_tensor, reduce_structure

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


def describe(S, label):
    print(f"== {label}: {len(S.generators)} gens, kinds {S.left_kind}/{S.right_kind}")
    classes = defaultdict(list)
    for g in S.generators:
        classes[(S.idempotents[g], S.gradings[g])].append(g)
    print(f"   classes: {sorted((len(v)) for v in classes.values())}")
    keys = set()
    for ts in S.delta.values():
        for _, m, _, _ in ts:
            for (k, e) in m.exps:
                keys.add(k)
    print(f"   live keys: {sorted(keys)}")
    gi = {g: i for i, g in enumerate(S.generators)}
    for kappa in sorted(keys):
        pure_out = defaultdict(list)
        pure_in = defaultdict(list)
        npure = 0
        for g, ts in S.delta.items():
            for (l, m, z, r) in ts:
                if m.exps == (((kappa), 1),) or m.exps == ((kappa, 1),):
                    ok_l = l is None or l.is_idempotent()
                    ok_r = r is None or r.is_idempotent()
                    if ok_l and ok_r:
                        npure += 1
                        pure_out[g].append(z)
                        pure_in[z].append(g)
        srcs = set(pure_out)
        tgts = set(pure_in)
        both = srcs & tgts
        covered = srcs | tgts
        multi_out = sum(1 for g in pure_out if len(pure_out[g]) > 1)
        multi_in = sum(1 for z in pure_in if len(pure_in[z]) > 1)
        print(
            f"   key {kappa}: {npure} pure edges, srcs {len(srcs)} tgts {len(tgts)}"
            f" both-roles {len(both)} covered {len(covered)}/{len(S.generators)}"
            f" multi-out {multi_out} multi-in {multi_in}"
        )
        if len(both) == 0 and covered == set(S.generators) and not multi_out and not multi_in:
            uppers = tgts
            cross = 0
            for g in uppers:
                for (_, m, z, _) in S.delta[g]:
                    if z not in uppers:
                        cross += 1
            print(f"      perfect matching; upper-subset escape terms: {cross}")


ct, slices = slice_structures(TREFOIL, keep_u=True)
print("k_total", ct.k_total)
acc = reduce_structure(slices[0])
describe(acc, "slice0 reduced")
acc = box_tensor(acc, slices[1])
acc = reduce_structure(box_tensor(acc, slices[2]))
describe(acc, "fold2 reduced")
acc = box_tensor(acc, slices[3])
acc = reduce_structure(box_tensor(acc, slices[4]))
describe(acc, "fold4 reduced")
