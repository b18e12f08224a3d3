import sys, time

sys.path.insert(0, "src")

from tanglehfk.compiler import parse_tangle, compile_tangle
from tanglehfk.wedge import WedgeSequence, build_structure
from tanglehfk.tensor import (
    V_SHIFT,
    W_SHIFT,
    _reducible,
    box_tensor,
    reduce_structure,
    split_all_factors,
)

word = parse_tangle(
    "signs: ; slices: cup(1,+-) cup(3,+-) x+(2) x+(2) x+(2) cap(2) cap(1)"
)
ct = compile_tangle(word)
seq = ct.sequence
print("slices:", [(P.m, P.n, int(P.mirror)) for P in seq.slices],
      "k_total", ct.k_total, "comps", ct.num_components, ct.num_closed_components,
      flush=True)
structs = []
last = len(seq.slices) - 1
t0 = time.time()
for i, P in enumerate(seq.slices):
    S = build_structure(
        WedgeSequence(
            (P,),
            contract_left=seq.contract_left and i == 0,
            contract_right=seq.contract_right and i == last,
        ),
        keep_u=False,
    )
    structs.append(S)
    print(f"slice {i}: {len(S.generators)} gens {S.left_kind}/{S.right_kind} "
          f"[{time.time()-t0:.1f}s]", flush=True)

def crunch(S):
    global vc, wc
    if not _reducible(S):
        return S
    S = reduce_structure(S)
    S, counts = split_all_factors(S)
    vc += counts.get(V_SHIFT, 0)
    wc += counts.get(W_SHIFT, 0)
    return S


vc = wc = 0
cur = crunch(structs[0])
for i, nxt in enumerate(structs[1:], 1):
    t1 = time.time()
    nxt = crunch(nxt)
    cur = box_tensor(cur, nxt)
    n_raw = len(cur.generators)
    tb = time.time()
    if _reducible(cur):
        cur = reduce_structure(cur)
        tr = time.time()
        cur, counts = split_all_factors(cur)
        vc += counts.get(V_SHIFT, 0)
        wc += counts.get(W_SHIFT, 0)
        print(f"fold {i}: raw {n_raw} -> {len(cur.generators)} gens, "
              f"terms {sum(len(v) for v in cur.delta.values())} "
              f"[box {tb-t1:.1f}s reduce {tr-tb:.1f}s split {time.time()-tr:.1f}s]",
              flush=True)
    else:
        print(f"fold {i}: raw {n_raw} gens, not reducible "
              f"[box {tb-t1:.1f}s]", flush=True)
print("final v", vc, "w", wc, f"total [{time.time()-t0:.1f}s]", flush=True)
t = {}
for g in cur.generators:
    grd = cur.gradings[g]
    t[(grd.maslov, grd.alexander2)] = t.get((grd.maslov, grd.alexander2), 0) + 1
print("core table", t, flush=True)
