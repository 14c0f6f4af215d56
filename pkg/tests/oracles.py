"""Independent brute-force references the library is tested against.

Everything here deliberately avoids the library's own code paths:
dense boolean elimination for fill/tree/levels, dense LU via numpy for
solves, and a dense complex-matrix Newton power flow (MATPOWER-style
dS/dV calculus) built straight from RawCase arrays.
"""

from __future__ import annotations

import math

import numpy as np


# -- symbolic oracles --------------------------------------------------------

def dense_fill(adj: np.ndarray) -> np.ndarray:
    """Boolean elimination on a dense adjacency matrix."""
    M = adj.copy()
    n = M.shape[0]
    for i in range(n):
        hi = np.flatnonzero(M[i, i + 1 :]) + i + 1
        for a in range(len(hi)):
            for b in range(a + 1, len(hi)):
                M[hi[a], hi[b]] = True
                M[hi[b], hi[a]] = True
    return M


def dense_parent(filled: np.ndarray):
    n = filled.shape[0]
    parent = []
    for i in range(n):
        up = np.flatnonzero(filled[i, i + 1 :])
        parent.append(int(up[0]) + i + 1 if len(up) else None)
    return parent


def strip_levels(parent):
    """Literal repeated leaf removal."""
    n = len(parent)
    remaining = set(range(n))
    levels = []
    while remaining:
        leaves = sorted(
            i
            for i in remaining
            if not any(parent[j] == i for j in remaining if j != i)
        )
        levels.append(leaves)
        remaining -= set(leaves)
    return levels


def random_pattern_edges(rng, n, density):
    edges = set()
    target = int(density * n * (n - 1) / 2)
    while len(edges) < target:
        i, j = rng.integers(0, n, 2)
        if i != j:
            edges.add((min(int(i), int(j)), max(int(i), int(j))))
    return sorted(edges)


def adj_matrix(n, edges):
    M = np.zeros((n, n), dtype=bool)
    for i, j in edges:
        M[i, j] = M[j, i] = True
    return M


# -- random systems ----------------------------------------------------------

def random_dd_system(rng, n, avg_degree=4.0, symmetric_values=False,
                     dtype=np.float64):
    """Structurally symmetric, diagonally dominant dense matrix."""
    A = np.zeros((n, n), dtype=dtype)
    target = int(avg_degree * n / 2)
    for _ in range(target):
        i, j = rng.integers(0, n, 2)
        if i == j:
            continue
        if np.issubdtype(dtype, np.complexfloating):
            vij = complex(rng.normal(), rng.normal())
            vji = vij if symmetric_values else complex(rng.normal(), rng.normal())
        else:
            vij = rng.normal()
            vji = vij if symmetric_values else rng.normal()
        A[i, j] = vij
        A[j, i] = vji
    dom = np.abs(A).sum(axis=1) + np.abs(A).sum(axis=0) + 1.0
    A[np.arange(n), np.arange(n)] = dom
    return A


# -- dense power flow oracle -------------------------------------------------

def dense_ybus(case) -> np.ndarray:
    """Complex bus admittance matrix straight from RawCase rows."""
    index = {b.id: k for k, b in enumerate(case.bus_rows)}
    n = len(case.bus_rows)
    Y = np.zeros((n, n), dtype=complex)
    for br in case.branch_rows:
        if br.status == 0:
            continue
        f, t = index[br.from_id], index[br.to_id]
        ys = 1.0 / complex(br.r, br.x)
        bc = 1j * br.b / 2.0
        tap = (br.tap if br.tap != 0 else 1.0) * np.exp(
            1j * math.radians(br.shift)
        )
        Y[f, f] += (ys + bc) / (tap * np.conj(tap))
        Y[t, t] += ys + bc
        Y[f, t] += -ys / np.conj(tap)
        Y[t, f] += -ys / tap
    for b in case.bus_rows:
        k = index[b.id]
        Y[k, k] += complex(b.gs, b.bs) / case.base_mva
    return Y


def case_state(case, flat=False):
    """(Vm, Va, Sbus, types) in file order; PV/slack magnitudes pinned."""
    n = len(case.bus_rows)
    index = {b.id: k for k, b in enumerate(case.bus_rows)}
    types = np.array([b.type for b in case.bus_rows])
    base = case.base_mva
    sbus = np.array(
        [complex(-b.pd / base, -b.qd / base) for b in case.bus_rows]
    )
    vset = np.ones(n)
    seen = np.zeros(n, dtype=bool)
    for gen in case.gen_rows:
        if gen.status == 0:
            continue
        k = index[gen.bus]
        sbus[k] += complex(gen.pg / base, gen.qg / base)
        if not seen[k]:
            vset[k] = gen.vg
            seen[k] = True
    vm = np.array([b.vm for b in case.bus_rows])
    va = np.array([math.radians(b.va) for b in case.bus_rows])
    if flat:
        slack = int(np.flatnonzero(types == 3)[0])
        vm = np.ones(n)
        va = np.zeros(n)
        va[slack] = math.radians(case.bus_rows[slack].va)
    pinned = (types == 2) | (types == 3)
    vm[pinned] = vset[pinned]
    return vm, va, sbus, types


def dense_mismatch(case, vm, va):
    """(dP over non-slack, dQ over PQ), scheduled minus calculated."""
    Y = dense_ybus(case)
    _, _, sbus, types = case_state(case)
    V = vm * np.exp(1j * va)
    mis = V * np.conj(Y @ V) - sbus
    nonslack = np.flatnonzero(types != 3)
    pq = np.flatnonzero(types == 1)
    return -mis.real[nonslack], -mis.imag[pq]


def dense_newton(case, tol=1e-10, max_iter=40, flat=False):
    """Full-matrix Newton via complex dS/dV calculus. Returns (vm, va,
    iterations, converged)."""
    Y = dense_ybus(case)
    vm, va, sbus, types = case_state(case, flat=flat)
    n = len(vm)
    pvpq = np.flatnonzero(types != 3)
    pq = np.flatnonzero(types == 1)
    V = vm * np.exp(1j * va)
    for it in range(max_iter + 1):
        mis = V * np.conj(Y @ V) - sbus
        F = np.concatenate([mis.real[pvpq], mis.imag[pq]])
        if len(F) == 0 or np.max(np.abs(F)) < tol:
            return np.abs(V), np.angle(V), it, True
        if it == max_iter:
            break
        Ibus = Y @ V
        diagV = np.diag(V)
        diagI = np.diag(Ibus)
        diagVnorm = np.diag(V / np.abs(V))
        dS_dVa = 1j * diagV @ np.conj(diagI - Y @ diagV)
        dS_dVm = diagV @ np.conj(Y @ diagVnorm) + np.conj(diagI) @ diagVnorm
        J11 = dS_dVa[np.ix_(pvpq, pvpq)].real
        J12 = dS_dVm[np.ix_(pvpq, pq)].real
        J21 = dS_dVa[np.ix_(pq, pvpq)].imag
        J22 = dS_dVm[np.ix_(pq, pq)].imag
        J = np.block([[J11, J12], [J21, J22]])
        dx = np.linalg.solve(J, -F)
        va[pvpq] += dx[: len(pvpq)]
        vm[pq] += dx[len(pvpq) :]
        V = vm * np.exp(1j * va)
    return np.abs(V), np.angle(V), max_iter, False
