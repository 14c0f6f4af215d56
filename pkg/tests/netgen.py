"""Random small-network generator for property tests.

Produces RawCase objects: connected topology (random spanning tree plus
extra branches, occasionally parallel circuits), a slack with generator,
a mix of PV/PQ buses, light loads so Newton converges from flat."""

from __future__ import annotations

import numpy as np

from gridflow.case_io import BranchRow, BusRow, GenRow, RawCase


def random_case(rng: np.random.Generator, n: int, pv_frac: float = 0.3,
                extra_edge_frac: float = 0.5, with_shift: bool = False) -> RawCase:
    ids = list(range(1, n + 1))
    types = [3] + [
        2 if rng.random() < pv_frac else 1 for _ in range(n - 1)
    ]

    buses = []
    for bid, btype in zip(ids, types):
        pd = float(rng.uniform(0.0, 20.0)) if btype == 1 else float(rng.uniform(0, 10))
        qd = float(rng.uniform(-5.0, 8.0)) if btype == 1 else 0.0
        bs = float(rng.choice([0.0, 0.0, 0.0, 5.0, -5.0]))
        buses.append(BusRow(id=bid, type=btype, pd=pd, qd=qd, gs=0.0, bs=bs,
                            vm=1.0, va=0.0, base_kv=138.0))

    gens = []
    total_load = sum(b.pd for b in buses)
    pv_buses = [b.id for b in buses if b.type in (2, 3)]
    for bid in pv_buses:
        pg = float(rng.uniform(0.0, 2.0 * total_load / max(len(pv_buses), 1)))
        vg = float(rng.uniform(0.98, 1.04))
        gens.append(GenRow(bus=bid, pg=pg, qg=0.0, vg=vg, status=1))

    def new_branch(f, t):
        r = float(rng.uniform(0.002, 0.03))
        x = float(rng.uniform(0.02, 0.2))
        b = float(rng.choice([0.0, rng.uniform(0.0, 0.04)]))
        tap = float(rng.choice([0.0, 0.0, rng.uniform(0.92, 1.08)]))
        shift = float(rng.choice([0.0, rng.uniform(-3, 3)])) if with_shift else 0.0
        return BranchRow(from_id=f, to_id=t, r=r, x=x, b=b, tap=tap,
                         shift=shift, status=1)

    branches = []
    for k in range(1, n):
        prev = int(rng.integers(0, k))
        branches.append(new_branch(ids[prev], ids[k]))
    for _ in range(int(extra_edge_frac * n)):
        i, j = rng.integers(0, n, 2)
        if i != j:
            branches.append(new_branch(ids[int(i)], ids[int(j)]))
    if n >= 3 and rng.random() < 0.5:
        twin = branches[int(rng.integers(0, len(branches)))]
        branches.append(new_branch(twin.from_id, twin.to_id))

    return RawCase(base_mva=100.0, bus_rows=buses, gen_rows=gens,
                   branch_rows=branches)
