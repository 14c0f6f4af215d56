"""MATPOWER-format case parsing and solution serialization.

Only the matrix-literal subset of the format is accepted: assignments
``mpc.baseMVA = <num>;`` and bracketed matrices ``mpc.bus = [...];``,
``mpc.gen = [...];``, ``mpc.branch = [...];``. ``%`` starts a comment,
rows end with ``;`` or a newline, and trailing extra columns in a row are
ignored. Other ``mpc.*`` fields (gencost, areas, version, ...) are
skipped.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import (
    CaseError,
    DanglingReference,
    IslandDetected,
    MalformedNumber,
    MissingGenerator,
    MissingSection,
    MultipleSlack,
    NoSlack,
    RowTooShort,
    ZeroImpedanceBranch,
)
from .netgraph import PQ, PV, SLACK, PowerSystemGraph

if TYPE_CHECKING:
    from .powerflow import PowerFlowSolution

ISOLATED = 4  # MATPOWER bus type for out-of-service buses; dropped on ingest

BUS_COLUMNS = 13
GEN_COLUMNS = 10
BRANCH_COLUMNS = 13


@dataclass
class BusRow:
    id: int
    type: int
    pd: float
    qd: float
    gs: float
    bs: float
    vm: float
    va: float
    base_kv: float


@dataclass
class GenRow:
    bus: int
    pg: float
    qg: float
    vg: float
    status: int


@dataclass
class BranchRow:
    from_id: int
    to_id: int
    r: float
    x: float
    b: float
    tap: float
    shift: float
    status: int


@dataclass
class RawCase:
    base_mva: float
    bus_rows: list[BusRow]
    gen_rows: list[GenRow]
    branch_rows: list[BranchRow]


def _line_col(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - text.rfind("\n", 0, offset)
    return line, col


def _blank_comments(text: str) -> str:
    """Replace %-comments with spaces, preserving every offset."""
    out = []
    pos = 0
    for m in re.finditer(r"%[^\n]*", text):
        out.append(text[pos : m.start()])
        out.append(" " * (m.end() - m.start()))
        pos = m.end()
    out.append(text[pos:])
    return "".join(out)


def _parse_number(text: str, token: str, offset: int) -> float:
    try:
        return float(token)
    except ValueError:
        line, col = _line_col(text, offset)
        raise MalformedNumber(token, line, col) from None


def _matrix_rows(text: str, clean: str, name: str):
    """Rows of ``mpc.<name> = [...]`` as lists of (token, offset)."""
    m = re.search(rf"mpc\.{name}\s*=\s*\[", clean)
    if m is None:
        raise MissingSection(name)
    start = m.end()
    end = clean.find("]", start)
    if end < 0:
        raise CaseError(f"section 'mpc.{name}': unterminated matrix")
    block = clean[start:end]
    rows: list[list[tuple[str, int]]] = []
    current: list[tuple[str, int]] = []
    prev_end = 0
    for tok in re.finditer(r";|[^\s;]+", block):
        if "\n" in block[prev_end : tok.start()] and current:
            rows.append(current)
            current = []
        prev_end = tok.end()
        if tok.group() == ";":
            if current:
                rows.append(current)
                current = []
        else:
            current.append((tok.group(), start + tok.start()))
    if current:
        rows.append(current)
    return rows


def _row_floats(text: str, section: str, rows, need: int) -> list[list[float]]:
    out = []
    for rownum, row in enumerate(rows, start=1):
        if len(row) < need:
            line, _ = _line_col(text, row[0][1])
            raise RowTooShort(section, rownum, len(row), need, line)
        out.append([_parse_number(text, tok, off) for tok, off in row[:need]])
    return out


def parse_matpower(text: str) -> RawCase:
    """Parse MATPOWER case text into a RawCase (rows in file order)."""
    clean = _blank_comments(text)
    m = re.search(r"mpc\.baseMVA\s*=\s*([^;\s\]]+)\s*;", clean)
    if m is None:
        raise MissingSection("baseMVA")
    base_mva = _parse_number(text, m.group(1), m.start(1))

    bus = _row_floats(text, "bus", _matrix_rows(text, clean, "bus"), BUS_COLUMNS)
    gen = _row_floats(text, "gen", _matrix_rows(text, clean, "gen"), GEN_COLUMNS)
    branch = _row_floats(
        text, "branch", _matrix_rows(text, clean, "branch"), BRANCH_COLUMNS
    )

    bus_rows = [
        BusRow(
            id=int(r[0]), type=int(r[1]), pd=r[2], qd=r[3], gs=r[4], bs=r[5],
            vm=r[7], va=r[8], base_kv=r[9],
        )
        for r in bus
    ]
    gen_rows = [
        GenRow(bus=int(r[0]), pg=r[1], qg=r[2], vg=r[5], status=int(r[7]))
        for r in gen
    ]
    branch_rows = [
        BranchRow(
            from_id=int(r[0]), to_id=int(r[1]), r=r[2], x=r[3], b=r[4],
            tap=r[8], shift=r[9], status=int(r[10]),
        )
        for r in branch
    ]
    return RawCase(base_mva, bus_rows, gen_rows, branch_rows)


def read_case(path) -> RawCase:
    with open(path, encoding="utf-8", errors="replace") as f:
        return parse_matpower(f.read())


def serialize_matpower(case: RawCase, name: str = "case") -> str:
    """Emit MATPOWER text that parses back to an equal RawCase.

    Columns this package ignores are written with stock values (area 1,
    zone 1, voltage limits 1.1/0.9, generator limits 0).
    """
    lines = [f"function mpc = {name}", "mpc.version = '2';",
             f"mpc.baseMVA = {case.base_mva!r};", "", "mpc.bus = ["]
    for b in case.bus_rows:
        lines.append(
            f"\t{b.id}\t{b.type}\t{b.pd!r}\t{b.qd!r}\t{b.gs!r}\t{b.bs!r}"
            f"\t1\t{b.vm!r}\t{b.va!r}\t{b.base_kv!r}\t1\t1.1\t0.9;"
        )
    lines.append("];")
    lines.append("")
    lines.append("mpc.gen = [")
    for g in case.gen_rows:
        lines.append(
            f"\t{g.bus}\t{g.pg!r}\t{g.qg!r}\t0\t0\t{g.vg!r}\t{case.base_mva!r}"
            f"\t{g.status}\t0\t0;"
        )
    lines.append("];")
    lines.append("")
    lines.append("mpc.branch = [")
    for br in case.branch_rows:
        lines.append(
            f"\t{br.from_id}\t{br.to_id}\t{br.r!r}\t{br.x!r}\t{br.b!r}\t0\t0\t0"
            f"\t{br.tap!r}\t{br.shift!r}\t{br.status}\t-360\t360;"
        )
    lines.append("];")
    lines.append("")
    return "\n".join(lines)


def to_graph(case: RawCase) -> PowerSystemGraph:
    """Validate a RawCase and build the per-unit attributed graph.

    Out-of-service branches/generators are dropped, isolated (type-4)
    buses are removed together with anything referencing them, bus ids
    map to dense indices in file order, and the network must be a single
    island around exactly one slack bus.
    """
    if case.base_mva <= 0:
        raise CaseError(f"baseMVA must be positive, got {case.base_mva}")

    kept = [b for b in case.bus_rows if b.type != ISOLATED]
    isolated_ids = {b.id for b in case.bus_rows if b.type == ISOLATED}
    for b in kept:
        if b.type not in (PQ, PV, SLACK):
            raise CaseError(f"bus {b.id}: unknown bus type {b.type}")
    index = {}
    for i, b in enumerate(kept):
        if b.id in index:
            raise CaseError(f"duplicate bus id {b.id}")
        index[b.id] = i
    n = len(kept)

    slack_ids = [b.id for b in kept if b.type == SLACK]
    if not slack_ids:
        raise NoSlack()
    if len(slack_ids) > 1:
        raise MultipleSlack(slack_ids)

    base = case.base_mva
    bus_type = np.array([b.type for b in kept], dtype=np.int8)
    pd = np.array([b.pd / base for b in kept])
    qd = np.array([b.qd / base for b in kept])
    gs = np.array([b.gs / base for b in kept])
    bs = np.array([b.bs / base for b in kept])
    vm0 = np.array([b.vm for b in kept])
    va0 = np.array([math.radians(b.va) for b in kept])

    pg = np.zeros(n)
    qg = np.zeros(n)
    vset = np.ones(n)
    has_gen = np.zeros(n, dtype=bool)
    for g in case.gen_rows:
        if g.bus in isolated_ids:
            continue
        if g.bus not in index:
            raise DanglingReference("generator", g.bus)
        if g.status == 0:
            continue
        i = index[g.bus]
        pg[i] += g.pg / base
        qg[i] += g.qg / base
        if not has_gen[i]:
            vset[i] = g.vg
            has_gen[i] = True

    for i in range(n):
        if bus_type[i] in (PV, SLACK) and not has_gen[i]:
            raise MissingGenerator(kept[i].id)

    edge_from, edge_to = [], []
    r, x, b_charge, tap, shift = [], [], [], [], []
    for br in case.branch_rows:
        if br.from_id in isolated_ids or br.to_id in isolated_ids:
            continue
        for end in (br.from_id, br.to_id):
            if end not in index:
                raise DanglingReference("branch", end)
        if br.status == 0:
            continue
        if br.from_id == br.to_id:
            raise CaseError(f"branch {br.from_id}-{br.to_id} is a self loop")
        if br.r == 0 and br.x == 0:
            raise ZeroImpedanceBranch(br.from_id, br.to_id)
        edge_from.append(index[br.from_id])
        edge_to.append(index[br.to_id])
        r.append(br.r)
        x.append(br.x)
        b_charge.append(br.b)
        tap.append(br.tap if br.tap != 0 else 1.0)
        shift.append(math.radians(br.shift))

    adjacency: list[list[int]] = [[] for _ in range(n)]
    for e, (f, t) in enumerate(zip(edge_from, edge_to)):
        adjacency[f].append(e)
        adjacency[t].append(e)

    g = PowerSystemGraph(
        n=n, base_mva=base, bus_ids=[b.id for b in kept], bus_type=bus_type,
        pd=pd, qd=qd, gs=gs, bs=bs, vm0=vm0, va0=va0,
        pg=pg, qg=qg, vset=vset, has_gen=has_gen,
        edge_from=np.array(edge_from, dtype=np.int32),
        edge_to=np.array(edge_to, dtype=np.int32),
        r=np.array(r), x=np.array(x), b_charge=np.array(b_charge),
        tap=np.array(tap), shift=np.array(shift),
        adjacency=adjacency,
    )

    reached = _reachable(g, g.slack)
    if not reached.all():
        raise IslandDetected([g.bus_ids[i] for i in np.flatnonzero(~reached)])
    return g


def load_case(path) -> PowerSystemGraph:
    return to_graph(read_case(path))


def _reachable(g: PowerSystemGraph, start: int) -> np.ndarray:
    seen = np.zeros(g.n, dtype=bool)
    seen[start] = True
    stack = [start]
    while stack:
        i = stack.pop()
        for e in g.adjacency[i]:
            j = int(g.edge_to[e]) if g.edge_from[e] == i else int(g.edge_from[e])
            if not seen[j]:
                seen[j] = True
                stack.append(j)
    return seen


def solution_dict(sol: "PowerFlowSolution") -> dict:
    """Solution as plain JSON-ready data, deterministic field order."""
    base = sol.base_mva
    return {
        "converged": bool(sol.converged),
        "method": sol.method_used,
        "iterations": int(sol.iterations),
        "max_mismatch_pu": float(sol.max_mismatch),
        "base_mva": float(base),
        "slack_p_mw": float(sol.slack_p * base),
        "slack_q_mvar": float(sol.slack_q * base),
        "buses": [
            {
                "bus": int(sol.bus_ids[i]),
                "vm_pu": float(sol.vm[i]),
                "va_deg": float(math.degrees(sol.va[i])),
            }
            for i in range(len(sol.bus_ids))
        ],
        "branches": [
            {
                "branch": e + 1,
                "from_bus": int(sol.branch_from[e]),
                "to_bus": int(sol.branch_to[e]),
                "p_from_mw": float(sol.branch_pf[e] * base),
                "q_from_mvar": float(sol.branch_qf[e] * base),
                "p_to_mw": float(sol.branch_pt[e] * base),
                "q_to_mvar": float(sol.branch_qt[e] * base),
            }
            for e in range(len(sol.branch_from))
        ],
        "pv_generation": [
            {"bus": int(b), "q_mvar": float(q * base)}
            for b, q in sol.pv_q.items()
        ],
        "mismatch_trace": [[float(p), float(q)] for p, q in sol.mismatch_trace],
    }


def write_solution(sol: "PowerFlowSolution", format: str = "json") -> str:
    """Serialize a solution; voltages as (Vm p.u., Va deg), flows in MW/MVAr."""
    data = solution_dict(sol)
    if format == "json":
        return json.dumps(data, indent=2) + "\n"
    if format == "csv":
        lines = ["# meta", "key,value"]
        for key in ("converged", "method", "iterations", "max_mismatch_pu",
                    "base_mva", "slack_p_mw", "slack_q_mvar"):
            lines.append(f"{key},{data[key]}")
        lines.append("")
        lines.append("# bus")
        lines.append("bus,vm_pu,va_deg")
        for row in data["buses"]:
            lines.append(f"{row['bus']},{row['vm_pu']!r},{row['va_deg']!r}")
        lines.append("")
        lines.append("# branch")
        lines.append("branch,from_bus,to_bus,p_from_mw,q_from_mvar,p_to_mw,q_to_mvar")
        for row in data["branches"]:
            lines.append(
                f"{row['branch']},{row['from_bus']},{row['to_bus']},"
                f"{row['p_from_mw']!r},{row['q_from_mvar']!r},"
                f"{row['p_to_mw']!r},{row['q_to_mvar']!r}"
            )
        lines.append("")
        return "\n".join(lines)
    raise ValueError(f"unknown format: {format!r}")
