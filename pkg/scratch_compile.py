import sys, time

sys.path.insert(0, "src")

from tanglehfk.compiler import parse_tangle, compile_tangle
from tanglehfk.wedge import WedgeSequence, build_structure
from tanglehfk.tensor import pair_sequence, V_SHIFT, W_SHIFT


def slice_structures(ct):
    seq = ct.sequence
    out = []
    last = len(seq.slices) - 1
    for i, P in enumerate(seq.slices):
        out.append(
            build_structure(
                WedgeSequence(
                    (P,),
                    contract_left=seq.contract_left and i == 0,
                    contract_right=seq.contract_right and i == last,
                ),
                keep_u=False,
            )
        )
    return out


def table_of(core):
    t = {}
    for g in core.generators:
        grd = core.gradings[g]
        t[(grd.maslov, grd.alexander2)] = t.get((grd.maslov, grd.alexander2), 0) + 1
    return t


def convolve(table, shift, times):
    for _ in range(times):
        out = {}
        for k, c in table.items():
            out[k] = out.get(k, 0) + c
            k2 = (k[0] + shift.maslov, k[1] + shift.alexander2)
            out[k2] = out.get(k2, 0) + c
        table = out
    return table


def run(name, text):
    t0 = time.time()
    word = parse_tangle(text)
    ct = compile_tangle(word)
    print(f"== {name}: {len(ct.sequence.slices)} slices, k_total={ct.k_total}, "
          f"components={ct.num_components}/{ct.num_closed_components} closed")
    structs = slice_structures(ct)
    sizes = [len(s.generators) for s in structs]
    print(f"   slice gen counts: {sizes}")
    res = pair_sequence(structs)
    t1 = time.time()
    core = res.structure
    print(f"   core: {len(core.generators)} gens, delta terms: "
          f"{sum(len(v) for v in core.delta.values())}, "
          f"v_splits={res.v_splits}, w_splits={res.w_splits}  [{t1-t0:.2f}s]")
    full = convolve(convolve(table_of(core), V_SHIFT, res.v_splits),
                    W_SHIFT, res.w_splits)
    print(f"   core table: {table_of(core)}")
    print(f"   full table: {full}")
    return ct, res


run("unknot", "signs: ; slices: cup(1,+-) cap(1)")
run("unknot-rII", "signs: ; slices: cup(1,+-) x+(1) x-(1) cap(1)")
run("hopf", "signs: ; slices: cup(1,+-) cup(3,+-) x+(2) x+(2) cap(2) cap(1)")
run("trefoil", "signs: ; slices: cup(1,+-) cup(3,+-) x+(2) x+(2) x+(2) cap(2) cap(1)")
