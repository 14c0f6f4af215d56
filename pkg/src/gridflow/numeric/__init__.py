"""Numeric LDU factorization and triangular solves over a filled pattern.

A = L·D·U with unit-triangular L and U. Storage follows the graph: one
diagonal value per node, two directed values per filled edge (toward the
lower index: the L entry; toward the higher: the U entry). Factorization
is fan-in by elimination-tree level: the task for node j gathers the
updates of all already-factored lower neighbors in ascending index order,
then normalizes its off-diagonals by the new pivot. The gather form makes
every memory location single-writer, so results are bit-identical across
worker counts.

Symmetric-valued systems factor with u_ij == l_ji exactly (the two sides
evaluate identical arithmetic expressions); nonsymmetric values share the
same code path.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .. import scheduler
from ..errors import DimensionMismatch, NumericError, PatternMismatch, SingularPivot
from ..symbolic import PatternGraph, SymbolicAnalysis, analyze
from ._backend import (
    active_backend,
    available_backends,
    force_backend,
    kernels,
    set_backend,
)
from ._structure import compile_structure

DEFAULT_PIVOT_TOLERANCE = 1e-12

__all__ = [
    "SparseSystem",
    "FactorGraph",
    "factorize",
    "refactorize_values",
    "solve",
    "load_matrix_market",
    "active_backend",
    "available_backends",
    "force_backend",
    "set_backend",
    "DEFAULT_PIVOT_TOLERANCE",
]


class SparseSystem:
    """Values laid over a filled pattern: diag a_ii plus per-edge (a_ij, a_ji).

    Fill edges start at zero. ``lo_val[e]`` is the entry below the
    diagonal (row > col), ``hi_val[e]`` the one above.
    """

    def __init__(self, analysis: SymbolicAnalysis, dtype=np.float64):
        self.analysis = analysis
        self.structure = compile_structure(analysis)
        n, m = self.structure.n, self.structure.m
        self.diag = np.zeros(n, dtype=dtype)
        self.lo_val = np.zeros(m, dtype=dtype)
        self.hi_val = np.zeros(m, dtype=dtype)

    @property
    def n(self) -> int:
        return self.structure.n

    @property
    def dtype(self):
        return self.diag.dtype

    def add_entry(self, i: int, j: int, value) -> None:
        if i == j:
            self.diag[i] += value
            return
        eid = self.structure.edge_id[(min(i, j), max(i, j))]
        if i > j:
            self.lo_val[eid] += value
        else:
            self.hi_val[eid] += value

    def set_entry(self, i: int, j: int, value) -> None:
        if i == j:
            self.diag[i] = value
            return
        eid = self.structure.edge_id[(min(i, j), max(i, j))]
        if i > j:
            self.lo_val[eid] = value
        else:
            self.hi_val[eid] = value

    def clear(self) -> None:
        self.diag[:] = 0
        self.lo_val[:] = 0
        self.hi_val[:] = 0

    def to_dense(self) -> np.ndarray:
        A = np.zeros((self.n, self.n), dtype=self.dtype)
        S = self.structure
        A[np.arange(self.n), np.arange(self.n)] = self.diag
        A[S.edge_j, S.edge_i] = self.lo_val
        A[S.edge_i, S.edge_j] = self.hi_val
        return A

    @classmethod
    def from_dense(cls, A) -> "SparseSystem":
        """Build from a dense structurally-symmetrizable matrix.

        The pattern is the union of (i,j) and (j,i) nonzeros; labels are
        matrix indices, eliminated in natural order.
        """
        A = np.asarray(A)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("square matrix required")
        n = A.shape[0]
        edges = [
            (i, j)
            for i in range(n)
            for j in range(i + 1, n)
            if A[i, j] != 0 or A[j, i] != 0
        ]
        sys = cls(analyze(PatternGraph(n, edges)), dtype=A.dtype)
        sys.diag[:] = np.diag(A)
        for i, j in edges:
            sys.set_entry(j, i, A[j, i])
            sys.set_entry(i, j, A[i, j])
        return sys


class FactorGraph:
    """L, D, U values over the same storage layout as SparseSystem."""

    def __init__(self, analysis, structure, d, lo, hi):
        self.analysis = analysis
        self.structure = structure
        self.d = d
        self.lo = lo  # l_ij, row i > col j (toward the lower index)
        self.hi = hi  # u_ij, row i < col j (toward the higher index)

    @property
    def n(self) -> int:
        return self.structure.n

    @property
    def dtype(self):
        return self.d.dtype


def _pivot_threshold(diag, pivot_tolerance: float) -> float:
    scale = float(np.max(np.abs(diag))) if diag.size else 0.0
    if scale == 0.0:
        scale = 1.0
    return pivot_tolerance * scale


def _factor_into(structure, d, lo, hi, pivot_tolerance, workers):
    threshold = _pivot_threshold(d, pivot_tolerance)
    failed = kernels().factorize(
        structure, d, lo, hi, threshold,
        scheduler.resolve_workers(workers), scheduler.SMALL_LEVEL_CUTOFF,
    )
    if failed >= 0:
        raise SingularPivot(failed)


def factorize(
    sys: SparseSystem,
    pivot_tolerance: float = DEFAULT_PIVOT_TOLERANCE,
    workers: int | None = None,
) -> FactorGraph:
    """A = L·D·U over the filled pattern; raises SingularPivot on a pivot
    below pivot_tolerance × max|initial diagonal|."""
    d = sys.diag.copy()
    lo = sys.lo_val.copy()
    hi = sys.hi_val.copy()
    _factor_into(sys.structure, d, lo, hi, pivot_tolerance, workers)
    return FactorGraph(sys.analysis, sys.structure, d, lo, hi)


def refactorize_values(
    factor: FactorGraph,
    sys: SparseSystem,
    pivot_tolerance: float = DEFAULT_PIVOT_TOLERANCE,
    workers: int | None = None,
) -> FactorGraph:
    """Refactor new values on the factor's fixed pattern, in place."""
    if not factor.structure.same_pattern(sys.structure):
        raise PatternMismatch()
    np.copyto(factor.d, sys.diag)
    np.copyto(factor.lo, sys.lo_val)
    np.copyto(factor.hi, sys.hi_val)
    _factor_into(factor.structure, factor.d, factor.lo, factor.hi,
                 pivot_tolerance, workers)
    return factor


def solve(factor: FactorGraph, b, workers: int | None = None,
          level_timer=None) -> np.ndarray:
    """x with A·x = b: forward by ascending levels, normalize, backward by
    descending levels.

    ``level_timer(position, seconds)`` instruments each level barrier of
    the two triangular phases; passing it routes this call through the
    Python kernels (the compiled core does not report per-level times).
    """
    b = np.asarray(b)
    if b.shape != (factor.n,):
        raise DimensionMismatch(b.shape[0] if b.ndim == 1 else -1, factor.n)
    dtype = np.result_type(factor.dtype, b.dtype, np.float64)
    w = scheduler.resolve_workers(workers)
    cutoff = scheduler.SMALL_LEVEL_CUTOFF
    if factor.dtype == dtype:
        d, lo, hi = factor.d, factor.lo, factor.hi
    else:
        d = factor.d.astype(dtype)
        lo = factor.lo.astype(dtype)
        hi = factor.hi.astype(dtype)
    z = b.astype(dtype, copy=True)
    if level_timer is not None:
        from . import _kernels_py

        _kernels_py.solve_forward(factor.structure, lo, z, w, cutoff,
                                  level_timer=level_timer)
        y = z / d if factor.n else z
        _kernels_py.solve_backward(factor.structure, hi, y, w, cutoff,
                                   level_timer=level_timer)
        return y
    kern = kernels()
    kern.solve_forward(factor.structure, lo, z, w, cutoff)
    y = z / d if factor.n else z
    kern.solve_backward(factor.structure, hi, y, w, cutoff)
    return y


def load_matrix_market(source) -> SparseSystem:
    """Read a Matrix Market coordinate file into a SparseSystem.

    Accepts real/integer/complex fields with `general` (must be
    structurally symmetric) or `symmetric` symmetry. 1-based indices per
    the format; labels become 0-based, eliminated in natural order.
    """
    if isinstance(source, (str, Path)) and "\n" not in str(source):
        text = Path(source).read_text()
    else:
        text = str(source)
    lines = text.splitlines()
    if not lines or not lines[0].startswith("%%MatrixMarket"):
        raise NumericError("not a Matrix Market file")
    header = lines[0].split()
    if len(header) < 5 or header[1].lower() != "matrix" or header[2].lower() != "coordinate":
        raise NumericError("only coordinate-format matrices are supported")
    field, symmetry = header[3].lower(), header[4].lower()
    if field not in ("real", "integer", "complex"):
        raise NumericError(f"unsupported field type: {field}")
    if symmetry not in ("general", "symmetric"):
        raise NumericError(f"unsupported symmetry: {symmetry}")
    dtype = np.complex128 if field == "complex" else np.float64

    body = [ln for ln in lines[1:] if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise NumericError("missing size line")
    nrow, ncol, nnz = (int(tok) for tok in body[0].split()[:3])
    if nrow != ncol:
        raise NumericError("matrix is not square")
    entries: list[tuple[int, int, complex]] = []
    for ln in body[1 : 1 + nnz]:
        toks = ln.split()
        i, j = int(toks[0]) - 1, int(toks[1]) - 1
        if field == "complex":
            v = complex(float(toks[2]), float(toks[3]))
        else:
            v = float(toks[2])
        entries.append((i, j, v))
    if len(entries) != nnz:
        raise NumericError(f"expected {nnz} entries, found {len(entries)}")

    offdiag = {(i, j) for i, j, _ in entries if i != j}
    if symmetry == "general":
        for i, j in offdiag:
            if (j, i) not in offdiag:
                raise NumericError(
                    f"general matrix is not structurally symmetric: ({i + 1},{j + 1})"
                )
    pattern = PatternGraph(nrow, [(min(i, j), max(i, j)) for i, j in offdiag])
    sys = SparseSystem(analyze(pattern), dtype=dtype)
    for i, j, v in entries:
        sys.add_entry(i, j, v)
        if symmetry == "symmetric" and i != j:
            sys.add_entry(j, i, v)
    return sys
