"""Attributed network graph and nodal admittance construction.

Buses are vertices carrying load, shunt, generation and voltage state;
branches are edges carrying the pi-model parameters. The admittance
relation I = Y·V is stored on the graph itself: y_ii on the vertex,
the directed pair (y_ij, y_ji) on the edge. Each bus's diagonal is
accumulated only from its own incident edges (in ascending incident-edge
id), so rows can be formed independently and the result never depends on
scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PQ, PV, SLACK = 1, 2, 3


@dataclass
class PowerSystemGraph:
    """Parsed network in per-unit, dense 0-based bus indices.

    Generators are aggregated per bus (net Pg/Qg, voltage target of the
    first in-service unit). Angles are radians; powers per-unit on
    base_mva.
    """

    n: int
    base_mva: float
    bus_ids: list[int]
    bus_type: np.ndarray
    pd: np.ndarray
    qd: np.ndarray
    gs: np.ndarray
    bs: np.ndarray
    vm0: np.ndarray
    va0: np.ndarray
    pg: np.ndarray
    qg: np.ndarray
    vset: np.ndarray
    has_gen: np.ndarray
    edge_from: np.ndarray
    edge_to: np.ndarray
    r: np.ndarray
    x: np.ndarray
    b_charge: np.ndarray
    tap: np.ndarray
    shift: np.ndarray
    adjacency: list[list[int]] = field(repr=False)

    @property
    def m(self) -> int:
        return len(self.edge_from)

    @property
    def slack(self) -> int:
        return int(np.flatnonzero(self.bus_type == SLACK)[0])

    def check_invariants(self) -> None:
        assert all(
            i in (self.edge_from[e], self.edge_to[e])
            for i in range(self.n)
            for e in self.adjacency[i]
        )
        for e in range(self.m):
            assert e in self.adjacency[self.edge_from[e]]
            assert e in self.adjacency[self.edge_to[e]]
        assert np.all(self.r**2 + self.x**2 > 0)
        gen_needed = (self.bus_type == PV) | (self.bus_type == SLACK)
        assert np.all(self.has_gen[gen_needed])


@dataclass
class AdmittanceGraph:
    """Complex nodal admittance as graph attributes.

    diag[i] = y_ii; y_ft[e] / y_tf[e] = the directed off-diagonal pair of
    edge e (unequal under off-nominal tap or phase shift).
    """

    diag: np.ndarray
    y_ft: np.ndarray
    y_tf: np.ndarray


def _edge_admittances(g: PowerSystemGraph):
    """Per-edge pi-model terminal admittances (y_ff, y_ft, y_tf, y_tt)."""
    ys = 1.0 / (g.r + 1j * g.x)
    ysh = 1j * g.b_charge / 2.0
    t = g.tap * np.exp(1j * g.shift)
    y_ff = (ys + ysh) / (t * np.conj(t))
    y_tt = ys + ysh
    y_ft = -ys / np.conj(t)
    y_tf = -ys / t
    return y_ff, y_ft, y_tf, y_tt


def build_admittance(g: PowerSystemGraph) -> AdmittanceGraph:
    """Form y_ii and (y_ij, y_ji) from the pi model.

    Bus shunts enter the diagonal as Gs + jBs; parallel edges accumulate.
    """
    y_ff, y_ft, y_tf, y_tt = _edge_admittances(g)
    diag = np.zeros(g.n, dtype=np.complex128)
    for i in range(g.n):
        acc = complex(g.gs[i], g.bs[i])
        for e in g.adjacency[i]:
            acc += y_ff[e] if g.edge_from[e] == i else y_tt[e]
        diag[i] = acc
    return AdmittanceGraph(diag, y_ft, y_tf)


def branch_flows(g: PowerSystemGraph, V: np.ndarray):
    """Terminal power flows per edge: S_f = V_f·conj(y_ff·V_f + y_ft·V_t),
    S_t analogously. Each edge independent of every other. Returns
    (Pf, Qf, Pt, Qt) in per-unit."""
    y_ff, y_ft, y_tf, y_tt = _edge_admittances(g)
    vf = V[g.edge_from]
    vt = V[g.edge_to]
    sf = vf * np.conj(y_ff * vf + y_ft * vt)
    st = vt * np.conj(y_tf * vf + y_tt * vt)
    return sf.real, sf.imag, st.real, st.imag
