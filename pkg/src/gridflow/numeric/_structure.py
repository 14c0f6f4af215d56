"""Flattened index arrays the factorization/solve kernels run over.

Built once per symbolic analysis and shared by every system with that
pattern. Edges are the filled pattern's, canonical (i < j), sorted
lexicographically; each stores two directed values in the owning
system/factor (toward the lower index and toward the higher index).
"""

from __future__ import annotations

import numpy as np

from ..symbolic import SymbolicAnalysis


class CompiledStructure:
    def __init__(self, analysis: SymbolicAnalysis):
        n = analysis.n
        edges = sorted(analysis.filled.edge_set())
        m = len(edges)
        self.analysis = analysis
        self.n = n
        self.m = m
        self.edge_id = {e: idx for idx, e in enumerate(edges)}
        self.edge_i = np.array([e[0] for e in edges], dtype=np.int32)
        self.edge_j = np.array([e[1] for e in edges], dtype=np.int32)

        # lo lists: neighbors k < i; up lists: neighbors j > i. Lexicographic
        # edge order makes both ascending without an extra sort.
        lo_lists: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        up_lists: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for eid, (i, j) in enumerate(edges):
            up_lists[i].append((j, eid))
            lo_lists[j].append((i, eid))
        self.lo_ptr, self.lo_idx, self.lo_eid = _pack(lo_lists, n)
        self.up_ptr, self.up_idx, self.up_eid = _pack(up_lists, n)

        self.levels_list = [list(lv) for lv in analysis.levels]
        nlev = len(self.levels_list)
        self.level_ptr = np.zeros(nlev + 1, dtype=np.int32)
        flat: list[int] = []
        for k, nodes in enumerate(self.levels_list):
            flat.extend(nodes)
            self.level_ptr[k + 1] = len(flat)
        self.level_nodes = np.array(flat, dtype=np.int32)

    def same_pattern(self, other: "CompiledStructure") -> bool:
        if self is other:
            return True
        return (
            self.n == other.n
            and self.m == other.m
            and np.array_equal(self.edge_i, other.edge_i)
            and np.array_equal(self.edge_j, other.edge_j)
        )


def _pack(lists, n):
    ptr = np.zeros(n + 1, dtype=np.int32)
    idx: list[int] = []
    eid: list[int] = []
    for i in range(n):
        for j, e in lists[i]:
            idx.append(j)
            eid.append(e)
        ptr[i + 1] = len(idx)
    return ptr, np.array(idx, dtype=np.int32), np.array(eid, dtype=np.int32)


def compile_structure(analysis: SymbolicAnalysis) -> CompiledStructure:
    """Return the cached CompiledStructure for an analysis."""
    cached = analysis._compiled
    if cached is None:
        cached = CompiledStructure(analysis)
        analysis._compiled = cached
    return cached
