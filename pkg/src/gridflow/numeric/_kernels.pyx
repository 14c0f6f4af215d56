# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel core: level-scheduled LDU factorization, triangular
solves and nodal power injection, parallelized with OpenMP.

Mirrors ``_kernels_py`` operation for operation: identical gather order,
identical expression association, single writer per output slot. Within a
level, nodes run in parallel; a barrier separates levels (prange joins).
"""

import numpy as np

cimport cython
cimport openmp
from cython.parallel cimport prange
from libc.math cimport cos, sin, fabs, sqrt

NAME = "compiled"

ctypedef fused scalar:
    double
    double complex


cdef inline double _mag(scalar x) noexcept nogil:
    if scalar is double:
        return fabs(x)
    else:
        return sqrt(x.real * x.real + x.imag * x.imag)


cdef inline void _factor_node(
    Py_ssize_t j,
    const int[::1] lo_ptr, const int[::1] lo_idx, const int[::1] lo_eid,
    const int[::1] up_ptr, const int[::1] up_idx, const int[::1] up_eid,
    scalar[::1] d, scalar[::1] lo, scalar[::1] hi,
    scalar[:, ::1] work_l, scalar[:, ::1] work_u, Py_ssize_t tid,
    double pivtol, char[::1] bad,
) noexcept nogil:
    cdef Py_ssize_t t, t2, i, e, e2, k, u0, u1
    cdef scalar s, ljk, ukj, dk
    u0 = up_ptr[j]
    u1 = up_ptr[j + 1]
    for t in range(u0, u1):
        i = up_idx[t]
        e = up_eid[t]
        work_l[tid, i] = lo[e]
        work_u[tid, i] = hi[e]
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
            work_l[tid, i] = work_l[tid, i] - (lo[e2] * dk) * ukj
            work_u[tid, i] = work_u[tid, i] - (hi[e2] * dk) * ljk
    d[j] = s
    if _mag(s) < pivtol:
        bad[j] = 1
        return
    for t in range(u0, u1):
        i = up_idx[t]
        e = up_eid[t]
        lo[e] = work_l[tid, i] / s
        hi[e] = work_u[tid, i] / s


def factorize(S, scalar[::1] d, scalar[::1] lo, scalar[::1] hi,
              double pivtol, int workers, int cutoff):
    cdef const int[::1] lo_ptr = S.lo_ptr
    cdef const int[::1] lo_idx = S.lo_idx
    cdef const int[::1] lo_eid = S.lo_eid
    cdef const int[::1] up_ptr = S.up_ptr
    cdef const int[::1] up_idx = S.up_idx
    cdef const int[::1] up_eid = S.up_eid
    cdef const int[::1] level_ptr = S.level_ptr
    cdef const int[::1] level_nodes = S.level_nodes
    cdef Py_ssize_t n = S.n
    cdef int nwork = workers if workers > 1 else 1
    dtype = np.asarray(d).dtype
    work_l_arr = np.zeros((nwork, max(n, 1)), dtype=dtype)
    work_u_arr = np.zeros((nwork, max(n, 1)), dtype=dtype)
    cdef scalar[:, ::1] work_l = work_l_arr
    cdef scalar[:, ::1] work_u = work_u_arr
    bad_arr = np.zeros(max(n, 1), dtype=np.int8)
    cdef char[::1] bad = bad_arr
    cdef Py_ssize_t lev, t, start, stop
    cdef Py_ssize_t nlev = level_ptr.shape[0] - 1
    for lev in range(nlev):
        start = level_ptr[lev]
        stop = level_ptr[lev + 1]
        if workers > 1 and stop - start >= cutoff:
            for t in prange(start, stop, nogil=True, num_threads=workers,
                            schedule='static'):
                _factor_node(level_nodes[t], lo_ptr, lo_idx, lo_eid,
                             up_ptr, up_idx, up_eid, d, lo, hi,
                             work_l, work_u,
                             <Py_ssize_t>openmp.omp_get_thread_num(),
                             pivtol, bad)
        else:
            with nogil:
                for t in range(start, stop):
                    _factor_node(level_nodes[t], lo_ptr, lo_idx, lo_eid,
                                 up_ptr, up_idx, up_eid, d, lo, hi,
                                 work_l, work_u, 0, pivtol, bad)
        for t in range(start, stop):
            if bad[level_nodes[t]]:
                return int(level_nodes[t])
    return -1


def solve_forward(S, scalar[::1] lval, scalar[::1] z, int workers, int cutoff):
    cdef const int[::1] lo_ptr = S.lo_ptr
    cdef const int[::1] lo_idx = S.lo_idx
    cdef const int[::1] lo_eid = S.lo_eid
    cdef const int[::1] level_ptr = S.level_ptr
    cdef const int[::1] level_nodes = S.level_nodes
    cdef Py_ssize_t lev, t, start, stop, i, q
    cdef scalar s
    cdef Py_ssize_t nlev = level_ptr.shape[0] - 1
    for lev in range(nlev):
        start = level_ptr[lev]
        stop = level_ptr[lev + 1]
        if workers > 1 and stop - start >= cutoff:
            for t in prange(start, stop, nogil=True, num_threads=workers,
                            schedule='static'):
                i = level_nodes[t]
                s = z[i]
                for q in range(lo_ptr[i], lo_ptr[i + 1]):
                    s = s - lval[lo_eid[q]] * z[lo_idx[q]]
                z[i] = s
        else:
            with nogil:
                for t in range(start, stop):
                    i = level_nodes[t]
                    s = z[i]
                    for q in range(lo_ptr[i], lo_ptr[i + 1]):
                        s = s - lval[lo_eid[q]] * z[lo_idx[q]]
                    z[i] = s


def solve_backward(S, scalar[::1] uval, scalar[::1] x, int workers, int cutoff):
    cdef const int[::1] up_ptr = S.up_ptr
    cdef const int[::1] up_idx = S.up_idx
    cdef const int[::1] up_eid = S.up_eid
    cdef const int[::1] level_ptr = S.level_ptr
    cdef const int[::1] level_nodes = S.level_nodes
    cdef Py_ssize_t lev, t, start, stop, i, q
    cdef scalar s
    cdef Py_ssize_t nlev = level_ptr.shape[0] - 1
    for lev in range(nlev - 1, -1, -1):
        start = level_ptr[lev]
        stop = level_ptr[lev + 1]
        if workers > 1 and stop - start >= cutoff:
            for t in prange(start, stop, nogil=True, num_threads=workers,
                            schedule='static'):
                i = level_nodes[t]
                s = x[i]
                for q in range(up_ptr[i], up_ptr[i + 1]):
                    s = s - uval[up_eid[q]] * x[up_idx[q]]
                x[i] = s
        else:
            with nogil:
                for t in range(start, stop):
                    i = level_nodes[t]
                    s = x[i]
                    for q in range(up_ptr[i], up_ptr[i + 1]):
                        s = s - uval[up_eid[q]] * x[up_idx[q]]
                    x[i] = s


def mismatch(const int[::1] inc_ptr, const int[::1] inc_nbr,
             const double[::1] inc_g, const double[::1] inc_b,
             const double[::1] gdiag, const double[::1] bdiag,
             const double[::1] vm, const double[::1] va,
             double[::1] pcalc, double[::1] qcalc,
             int workers, int cutoff):
    cdef Py_ssize_t n = vm.shape[0]
    cdef Py_ssize_t i, t
    cdef double vi, p, q, dth, c, sn, vv
    if workers > 1 and n >= cutoff:
        for i in prange(n, nogil=True, num_threads=workers, schedule='static'):
            vi = vm[i]
            p = (vi * vi) * gdiag[i]
            q = -(vi * vi) * bdiag[i]
            for t in range(inc_ptr[i], inc_ptr[i + 1]):
                dth = va[i] - va[inc_nbr[t]]
                c = cos(dth)
                sn = sin(dth)
                vv = vi * vm[inc_nbr[t]]
                p = p + vv * (inc_g[t] * c + inc_b[t] * sn)
                q = q + vv * (inc_g[t] * sn - inc_b[t] * c)
            pcalc[i] = p
            qcalc[i] = q
    else:
        with nogil:
            for i in range(n):
                vi = vm[i]
                p = (vi * vi) * gdiag[i]
                q = -(vi * vi) * bdiag[i]
                for t in range(inc_ptr[i], inc_ptr[i + 1]):
                    dth = va[i] - va[inc_nbr[t]]
                    c = cos(dth)
                    sn = sin(dth)
                    vv = vi * vm[inc_nbr[t]]
                    p = p + vv * (inc_g[t] * c + inc_b[t] * sn)
                    q = q + vv * (inc_g[t] * sn - inc_b[t] * c)
                pcalc[i] = p
                qcalc[i] = q
