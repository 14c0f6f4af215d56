"""Pure-Python kernel twin.

Same algorithms, loop structure and arithmetic expression order as the
compiled extension in ``_kernels.pyx``; selected at import time when the
extension is unavailable (or forced via GRIDFLOW_KERNELS=python). Every
gather runs in ascending index order and every output slot has exactly
one writer, so results are independent of worker count.
"""

from __future__ import annotations

import threading
from math import cos, sin

import numpy as np

from .. import scheduler

NAME = "python"

_tls = threading.local()


def _workspace(n, dtype):
    ws = getattr(_tls, "ws", None)
    if ws is None or ws[0].shape[0] < n or ws[0].dtype != dtype:
        ws = (np.zeros(n, dtype=dtype), np.zeros(n, dtype=dtype))
        _tls.ws = ws
    return ws


def factorize(S, d, lo, hi, pivtol, workers, cutoff):
    """In-place LDU over the filled pattern, level by level, fan-in.

    d/lo/hi enter holding matrix values and leave holding D, L, U.
    Returns the lowest failing node of the earliest failing level, or -1.
    """
    n = S.n
    lo_ptr, lo_idx, lo_eid = S.lo_ptr, S.lo_idx, S.lo_eid
    up_ptr, up_idx, up_eid = S.up_ptr, S.up_idx, S.up_eid
    bad = np.zeros(n, dtype=bool)
    dtype = d.dtype

    def node_task(j):
        wl, wu = _workspace(n, dtype)
        u0, u1 = up_ptr[j], up_ptr[j + 1]
        for t in range(u0, u1):
            i = up_idx[t]
            e = up_eid[t]
            wl[i] = lo[e]
            wu[i] = hi[e]
        s = d[j]
        for t in range(lo_ptr[j], lo_ptr[j + 1]):
            k = lo_idx[t]
            e = lo_eid[t]
            ljk = lo[e]
            ukj = hi[e]
            dk = d[k]
            s = s - (ljk * dk) * ukj
            for t2 in range(up_ptr[k], up_ptr[k + 1]):
                i = up_idx[t2]
                if i <= j:
                    continue
                e2 = up_eid[t2]
                wl[i] = wl[i] - (lo[e2] * dk) * ukj
                wu[i] = wu[i] - (hi[e2] * dk) * ljk
        d[j] = s
        if abs(s) < pivtol:
            bad[j] = True
            return
        for t in range(u0, u1):
            i = up_idx[t]
            e = up_eid[t]
            lo[e] = wl[i] / s
            hi[e] = wu[i] / s

    for nodes in S.levels_list:
        scheduler.run_nodal(node_task, nodes, 1 if len(nodes) < cutoff else workers)
        for j in nodes:
            if bad[j]:
                return int(j)
    return -1


def solve_forward(S, lval, z, workers, cutoff, level_timer=None):
    """z <- L^-1 z by ascending levels (unit diagonal implicit)."""
    lo_ptr, lo_idx, lo_eid = S.lo_ptr, S.lo_idx, S.lo_eid

    def task(i):
        s = z[i]
        for t in range(lo_ptr[i], lo_ptr[i + 1]):
            s = s - lval[lo_eid[t]] * z[lo_idx[t]]
        z[i] = s

    scheduler.run_levels(S.levels_list, task, workers, "forward", cutoff,
                         level_timer=level_timer)


def solve_backward(S, uval, x, workers, cutoff, level_timer=None):
    """x <- U^-1 x by descending levels (unit diagonal implicit)."""
    up_ptr, up_idx, up_eid = S.up_ptr, S.up_idx, S.up_eid

    def task(i):
        s = x[i]
        for t in range(up_ptr[i], up_ptr[i + 1]):
            s = s - uval[up_eid[t]] * x[up_idx[t]]
        x[i] = s

    scheduler.run_levels(S.levels_list, task, workers, "backward", cutoff,
                         level_timer=level_timer)


def mismatch(inc_ptr, inc_nbr, inc_g, inc_b, gdiag, bdiag, vm, va, pcalc, qcalc,
             workers, cutoff):
    """Calculated P/Q injection per bus; each bus independent, incident
    terms summed in ascending (neighbor, edge) order after the self term."""
    n = vm.shape[0]

    def task(i):
        vi = vm[i]
        p = (vi * vi) * gdiag[i]
        q = -(vi * vi) * bdiag[i]
        for t in range(inc_ptr[i], inc_ptr[i + 1]):
            j = inc_nbr[t]
            dth = va[i] - va[j]
            c = cos(dth)
            sn = sin(dth)
            vv = vi * vm[j]
            p = p + vv * (inc_g[t] * c + inc_b[t] * sn)
            q = q + vv * (inc_g[t] * sn - inc_b[t] * c)
        pcalc[i] = p
        qcalc[i] = q

    scheduler.run_nodal(task, range(n), 1 if n < cutoff else workers)
