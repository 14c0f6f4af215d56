"""Symbolic analysis of structurally symmetric sparse patterns.

A pattern is an undirected graph whose nodes are matrix rows/columns.
Three derived structures drive the parallel numeric layer:

* the filled pattern (original edges plus every fill edge created by
  sparse Gaussian elimination in a given order),
* the elimination tree (parent = smallest higher-numbered neighbor in
  the filled pattern), which encodes all column dependencies,
* the level partition obtained by repeatedly stripping tree leaves;
  nodes in one level have no mutual dependencies and factor/solve
  concurrently between barriers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence


class PatternGraph:
    """Undirected adjacency structure, no self loops, neighbors sorted."""

    __slots__ = ("n", "neighbors")

    def __init__(self, n: int, edges: Sequence[tuple[int, int]] = ()):
        self.n = n
        nbr: list[set[int]] = [set() for _ in range(n)]
        for i, j in edges:
            if i == j:
                raise ValueError(f"self loop at node {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i},{j}) outside 0..{n - 1}")
            nbr[i].add(j)
            nbr[j].add(i)
        self.neighbors: list[list[int]] = [sorted(s) for s in nbr]

    def edge_set(self) -> set[tuple[int, int]]:
        """All edges as (i, j) with i < j."""
        return {
            (i, j) for i in range(self.n) for j in self.neighbors[i] if i < j
        }

    def edge_count(self) -> int:
        return sum(len(a) for a in self.neighbors) // 2

    def has_edge(self, i: int, j: int) -> bool:
        a = self.neighbors[min(i, j, key=lambda k: len(self.neighbors[k]))]
        return (j if a is self.neighbors[i] else i) in a

    def permuted(self, order: Sequence[int]) -> "PatternGraph":
        """Relabel node v as order[v]."""
        return PatternGraph(
            self.n, [(order[i], order[j]) for i, j in self.edge_set()]
        )


@dataclass(eq=False)
class SymbolicAnalysis:
    """Filled pattern, elimination tree and level partition (one order)."""

    filled: PatternGraph
    fill_edges: set[tuple[int, int]]
    parent: list[int | None]
    levels: list[list[int]]
    level_of: list[int]  # 1-based; level 1 = elimination-tree leaves
    _compiled: object = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.filled.n

    def height(self) -> int:
        return len(self.levels)

    def original_edges(self) -> set[tuple[int, int]]:
        return self.filled.edge_set() - self.fill_edges


def compute_fill(pattern: PatternGraph, order: Sequence[int] | None = None) -> PatternGraph:
    """Exact symbolic elimination fill.

    ``order[v]`` is the elimination position of node v; all output labels
    are elimination positions. Nodes are processed sequentially in
    elimination order: eliminating a node connects every pair of its
    currently-adjacent higher-numbered neighbors, and fill created at
    step i participates in every later step (cascades are captured).
    """
    n = pattern.n
    if order is None:
        adj = [set(a) for a in pattern.neighbors]
    else:
        if sorted(order) != list(range(n)):
            raise ValueError("order is not a permutation of 0..n-1")
        adj = [set() for _ in range(n)]
        for i, j in pattern.edge_set():
            adj[order[i]].add(order[j])
            adj[order[j]].add(order[i])
    for i in range(n):
        higher = sorted(j for j in adj[i] if j > i)
        for j, k in combinations(higher, 2):
            if k not in adj[j]:
                adj[j].add(k)
                adj[k].add(j)
    out = PatternGraph(n)
    out.neighbors = [sorted(s) for s in adj]
    return out


def compute_etree(filled: PatternGraph) -> list[int | None]:
    """parent(i) = min higher-numbered neighbor in the filled pattern.

    Requires a fill-closed pattern; each node's parent is independent of
    every other node's (nodal-parallel).
    """
    parent: list[int | None] = []
    for i, nbrs in enumerate(filled.neighbors):
        up = [j for j in nbrs if j > i]
        parent.append(min(up) if up else None)
    return parent


def compute_levels(parent: Sequence[int | None]) -> list[list[int]]:
    """Partition tree nodes by leaf-stripping depth.

    level(i) = 1 for leaves, else 1 + max level over children; equal to
    the round in which repeated leaf removal deletes the node. Children
    always precede parents (parent > child), so one ascending pass
    suffices.
    """
    n = len(parent)
    level = [1] * n
    for i in range(n):
        p = parent[i]
        if p is not None:
            if p <= i:
                raise ValueError(f"parent({i}) = {p} is not > {i}")
            level[p] = max(level[p], level[i] + 1)
    height = max(level, default=0)
    levels: list[list[int]] = [[] for _ in range(height)]
    for i in range(n):
        levels[level[i] - 1].append(i)
    return levels


def analyze(pattern: PatternGraph, order: Sequence[int] | None = None) -> SymbolicAnalysis:
    """Full symbolic pass: fill, elimination tree, level partition."""
    filled = compute_fill(pattern, order)
    if order is None:
        original = pattern.edge_set()
    else:
        original = {
            tuple(sorted((order[i], order[j]))) for i, j in pattern.edge_set()
        }
    fill_edges = filled.edge_set() - original
    parent = compute_etree(filled)
    levels = compute_levels(parent)
    level_of = [0] * pattern.n
    for lev, nodes in enumerate(levels, start=1):
        for i in nodes:
            level_of[i] = lev
    return SymbolicAnalysis(filled, fill_edges, parent, levels, level_of)


def reorder(pattern: PatternGraph, scheme: str = "natural") -> list[int]:
    """Elimination order: order[v] = position of node v.

    "natural" is the identity; "mindeg" is minimum degree on the
    elimination graph with multiple elimination (each pass removes a
    maximal independent set of current-minimum-degree nodes, scanned in
    ascending index), ties broken by smallest original index throughout.
    """
    if scheme == "natural":
        return list(range(pattern.n))
    if scheme != "mindeg":
        raise ValueError(f"unknown ordering scheme: {scheme!r}")
    n = pattern.n
    adj = [set(a) for a in pattern.neighbors]
    remaining = set(range(n))
    order = [0] * n
    pos = 0
    while remaining:
        dmin = min(len(adj[u]) for u in remaining)
        batch: list[int] = []
        taken: set[int] = set()
        for u in sorted(remaining):
            if len(adj[u]) == dmin and not (adj[u] & taken):
                batch.append(u)
                taken.add(u)
        for v in batch:
            order[v] = pos
            pos += 1
            remaining.discard(v)
            nbrs = sorted(adj[v])
            for u in nbrs:
                adj[u].discard(v)
            for a, b in combinations(nbrs, 2):
                adj[a].add(b)
                adj[b].add(a)
    return order


def expand_analysis(analysis: SymbolicAnalysis, blocks: Sequence[int]) -> SymbolicAnalysis:
    """Blow each node up into a dense block of consecutive scalar slots.

    Block sizes of 0 drop the node. The expansion of a fill-closed
    pattern is fill-closed, so no new fill computation is needed; the
    elimination tree and levels are recomputed on the expanded labels.
    """
    if len(blocks) != analysis.n:
        raise ValueError("one block size per node required")
    offset: list[int] = []
    total = 0
    for b in blocks:
        offset.append(total)
        total += b
    edges: list[tuple[int, int]] = []
    for node, b in enumerate(blocks):
        for s, t in combinations(range(offset[node], offset[node] + b), 2):
            edges.append((s, t))
    for i, j in analysis.filled.edge_set():
        for s in range(offset[i], offset[i] + blocks[i]):
            for t in range(offset[j], offset[j] + blocks[j]):
                edges.append((s, t))
    filled = PatternGraph(total, edges)
    fill_edges = set()
    for i, j in analysis.fill_edges:
        for s in range(offset[i], offset[i] + blocks[i]):
            for t in range(offset[j], offset[j] + blocks[j]):
                fill_edges.add(tuple(sorted((s, t))))
    parent = compute_etree(filled)
    levels = compute_levels(parent)
    level_of = [0] * total
    for lev, nodes in enumerate(levels, start=1):
        for i in nodes:
            level_of[i] = lev
    return SymbolicAnalysis(filled, fill_edges, parent, levels, level_of)
