"""AC power flow: Newton-Raphson, fast-decoupled (XB), and the
industry-style auto strategy (fast-decoupled first, Newton from its last
iterate if it fails to converge).

All linear algebra goes through the numeric module. One symbolic
analysis is computed per topology on the slack-reduced bus graph and
shared: the Newton Jacobian expands it by per-bus block size (2 for PQ,
1 for PV), B' uses it directly, and B'' restricts it to the PQ buses.
Variables interleave per bus ((theta_i, V_i) adjacent) so the scalar
pattern is exactly the bus pattern blown up block-wise.

Mismatch is computed per bus from the bus's own incident edges (fixed
inner order) and reduced with a max-norm; the iteration loop itself is
sequential.
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from . import numeric, scheduler, symbolic
from .netgraph import (
    PQ,
    PV,
    SLACK,
    AdmittanceGraph,
    PowerSystemGraph,
    branch_flows,
    build_admittance,
)

DEFAULT_TOL = 1e-8
NEWTON_MAX_ITER = 20
FD_MAX_ITER = 60

_METHODS = ("newton", "fast_decoupled", "auto")


@dataclass
class PowerFlowConfig:
    method: str = "auto"
    tol: float = DEFAULT_TOL
    max_iter: int | None = None  # None: 20 for Newton, 60 for fast-decoupled
    fd_max_iter: int | None = None  # caps only the fast-decoupled attempt
    flat_start: bool = False
    threads: int | None = None
    order: str = "natural"

    def __post_init__(self):
        if self.method == "fd":
            self.method = "fast_decoupled"
        if self.method not in _METHODS:
            raise ValueError(f"unknown method: {self.method!r}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        for limit in (self.max_iter, self.fd_max_iter):
            if limit is not None and limit < 0:
                raise ValueError("iteration limits must be >= 0")

    def iter_limit(self, method: str) -> int:
        if method == "newton":
            return NEWTON_MAX_ITER if self.max_iter is None else self.max_iter
        if self.fd_max_iter is not None:
            return self.fd_max_iter
        return FD_MAX_ITER if self.max_iter is None else self.max_iter


@dataclass
class PowerFlowSolution:
    converged: bool
    method_used: str
    iterations: int
    vm: np.ndarray
    va: np.ndarray
    slack_p: float
    slack_q: float
    pv_q: dict[int, float]
    branch_from: list[int]
    branch_to: list[int]
    branch_pf: np.ndarray
    branch_qf: np.ndarray
    branch_pt: np.ndarray
    branch_qt: np.ndarray
    mismatch_trace: list[tuple[float, float]]
    max_mismatch: float
    bus_ids: list[int]
    base_mva: float
    timings_ms: dict[str, float] = field(default_factory=dict)


class _PhaseTimer:
    def __init__(self):
        self.acc: dict[str, float] = {}

    @contextmanager
    def phase(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.acc[name] = self.acc.get(name, 0.0) + time.perf_counter() - t0

    def as_ms(self) -> dict[str, float]:
        return {k: v * 1e3 for k, v in self.acc.items()}


class _Context:
    """Per-topology state shared by every method: admittance attributes,
    mismatch incidence, scheduled injections, bus-level symbolic analysis."""

    def __init__(self, g: PowerSystemGraph, order_scheme: str = "natural",
                 workers: int | None = None, timer: _PhaseTimer | None = None,
                 ybus: AdmittanceGraph | None = None):
        self.g = g
        self.workers = scheduler.resolve_workers(workers)
        self.timer = timer or _PhaseTimer()

        with self.timer.phase("assembly"):
            self.Y = ybus if ybus is not None else build_admittance(g)
            self.gdiag = np.ascontiguousarray(self.Y.diag.real)
            self.bdiag = np.ascontiguousarray(self.Y.diag.imag)
            self._build_incidence()
            self.psched = g.pg - g.pd
            self.qsched = g.qg - g.qd
            self.pcalc = np.zeros(g.n)
            self.qcalc = np.zeros(g.n)

        self.nonslack = np.flatnonzero(g.bus_type != SLACK)
        self.pq = np.flatnonzero(g.bus_type == PQ)
        self.pv = np.flatnonzero(g.bus_type == PV)
        self.slack = g.slack

        with self.timer.phase("symbolic"):
            nr = len(self.nonslack)
            self.red_of_bus = np.full(g.n, -1, dtype=np.int64)
            self.red_of_bus[self.nonslack] = np.arange(nr)
            edges = set()
            for e in range(g.m):
                f = int(g.edge_from[e])
                t = int(g.edge_to[e])
                if f == self.slack or t == self.slack or f == t:
                    continue
                rf, rt = int(self.red_of_bus[f]), int(self.red_of_bus[t])
                edges.add((min(rf, rt), max(rf, rt)))
            self.bus_pattern = symbolic.PatternGraph(nr, sorted(edges))
            self.order = symbolic.reorder(self.bus_pattern, order_scheme)
            self.bus_analysis = symbolic.analyze(self.bus_pattern, self.order)
            # position p in elimination order <-> bus index
            self.pos_of_bus = np.full(g.n, -1, dtype=np.int64)
            self.bus_at_pos = np.zeros(nr, dtype=np.int64)
            for b in self.nonslack:
                p = self.order[self.red_of_bus[b]]
                self.pos_of_bus[b] = p
                self.bus_at_pos[p] = b

        self._newton = None
        self._fd = None

    def _build_incidence(self):
        g, Y = self.g, self.Y
        entries = []
        for e in range(g.m):
            f, t = int(g.edge_from[e]), int(g.edge_to[e])
            entries.append((f, t, e, Y.y_ft[e]))
            entries.append((t, f, e, Y.y_tf[e]))
        entries.sort(key=lambda rec: (rec[0], rec[1], rec[2]))
        self.inc_ptr = np.zeros(g.n + 1, dtype=np.int32)
        self.inc_nbr = np.zeros(len(entries), dtype=np.int32)
        self.inc_g = np.zeros(len(entries))
        self.inc_b = np.zeros(len(entries))
        for k, (bus, nbr, _e, y) in enumerate(entries):
            self.inc_ptr[bus + 1] += 1
            self.inc_nbr[k] = nbr
            self.inc_g[k] = y.real
            self.inc_b[k] = y.imag
        np.cumsum(self.inc_ptr, out=self.inc_ptr)

    def calc_injections(self, vm, va):
        with self.timer.phase("assembly"):
            numeric.kernels().mismatch(
                self.inc_ptr, self.inc_nbr, self.inc_g, self.inc_b,
                self.gdiag, self.bdiag, vm, va, self.pcalc, self.qcalc,
                self.workers, scheduler.SMALL_LEVEL_CUTOFF,
            )
        return self.pcalc, self.qcalc

    def mismatch(self, vm, va):
        p, q = self.calc_injections(vm, va)
        dP = self.psched[self.nonslack] - p[self.nonslack]
        dQ = self.qsched[self.pq] - q[self.pq]
        return dP, dQ

    def newton(self) -> "_NewtonSystem":
        if self._newton is None:
            self._newton = _NewtonSystem(self)
        return self._newton

    def fd(self) -> "_FdSystems":
        if self._fd is None:
            self._fd = _FdSystems(self)
        return self._fd


def _max_abs(v) -> float:
    return float(np.max(np.abs(v))) if len(v) else 0.0


class _NewtonSystem:
    """Polar Jacobian on the block-expanded pattern plus assembly maps."""

    def __init__(self, ctx: _Context):
        self.ctx = ctx
        g = ctx.g
        with ctx.timer.phase("symbolic"):
            nr = len(ctx.nonslack)
            blocks = [2 if g.bus_type[ctx.bus_at_pos[p]] == PQ else 1
                      for p in range(nr)]
            offs = np.concatenate(([0], np.cumsum(blocks))).astype(np.int64)
            self.order_scalar = int(offs[-1])
            self.analysis = symbolic.expand_analysis(ctx.bus_analysis, blocks)
            self.system = numeric.SparseSystem(self.analysis)
            self.theta_slot = np.full(g.n, -1, dtype=np.int64)
            self.v_slot = np.full(g.n, -1, dtype=np.int64)
            for b in ctx.nonslack:
                p = ctx.pos_of_bus[b]
                self.theta_slot[b] = offs[p]
                if g.bus_type[b] == PQ:
                    self.v_slot[b] = offs[p] + 1
            self._build_maps()
        self.factor = None

    def _slot_entry(self, row: int, col: int) -> tuple[int, int]:
        """(edge id, side): side 0 = below diagonal, 1 = above."""
        eid = self.system.structure.edge_id[(min(row, col), max(row, col))]
        return eid, 0 if row > col else 1

    def _build_maps(self):
        ctx, g = self.ctx, self.ctx.g
        je = [e for e in range(g.m)
              if ctx.pos_of_bus[g.edge_from[e]] >= 0
              and ctx.pos_of_bus[g.edge_to[e]] >= 0]
        self.jf = g.edge_from[je].astype(np.int64)
        self.jt = g.edge_to[je].astype(np.int64)
        yft = ctx.Y.y_ft[je]
        ytf = ctx.Y.y_tf[je]
        self.g_ft, self.b_ft = yft.real.copy(), yft.imag.copy()
        self.g_tf, self.b_tf = ytf.real.copy(), ytf.imag.copy()

        kinds = {}  # kind -> (src indices, eids, sides)
        for kind in ("VVS_ft", "VVS_tf", "VA_ft", "VA_tf",
                     "mVVA_ft", "mVVA_tf", "VS_ft", "VS_tf"):
            kinds[kind] = ([], [], [])

        def put(kind, k, row, col):
            if row < 0 or col < 0:
                return
            eid, side = self._slot_entry(row, col)
            kinds[kind][0].append(k)
            kinds[kind][1].append(eid)
            kinds[kind][2].append(side)

        for k in range(len(je)):
            f, t = int(self.jf[k]), int(self.jt[k])
            tf_, tt = int(self.theta_slot[f]), int(self.theta_slot[t])
            vf, vt = int(self.v_slot[f]), int(self.v_slot[t])
            put("VVS_ft", k, tf_, tt)       # dP_f/dtheta_t
            put("VVS_tf", k, tt, tf_)       # dP_t/dtheta_f
            put("VA_ft", k, tf_, vt)        # dP_f/dV_t
            put("VA_tf", k, tt, vf)         # dP_t/dV_f
            put("mVVA_ft", k, vf, tt)       # dQ_f/dtheta_t
            put("mVVA_tf", k, vt, tf_)      # dQ_t/dtheta_f
            put("VS_ft", k, vf, vt)         # dQ_f/dV_t
            put("VS_tf", k, vt, vf)         # dQ_t/dV_f

        self.maps = {}
        for kind, (src, eids, sides) in kinds.items():
            src = np.array(src, dtype=np.int64)
            eids = np.array(eids, dtype=np.int64)
            sides = np.array(sides, dtype=np.int64)
            self.maps[kind] = (
                (src[sides == 0], eids[sides == 0]),  # lo side
                (src[sides == 1], eids[sides == 1]),  # hi side
            )

        # (theta, V) intra-bus entries per PQ bus
        self.tv_eid = np.array(
            [self._slot_entry(int(self.theta_slot[b]), int(self.v_slot[b]))[0]
             for b in ctx.pq],
            dtype=np.int64,
        )

    def assemble(self, vm, va, pcalc, qcalc):
        ctx = self.ctx
        sysm = self.system
        with ctx.timer.phase("assembly"):
            sysm.clear()
            ns, pq = ctx.nonslack, ctx.pq
            th = self.theta_slot
            vsl = self.v_slot
            # diagonal blocks
            sysm.diag[th[ns]] = -qcalc[ns] - ctx.bdiag[ns] * vm[ns] ** 2
            if len(pq):
                sysm.diag[vsl[pq]] = qcalc[pq] / vm[pq] - ctx.bdiag[pq] * vm[pq]
                sysm.hi_val[self.tv_eid] = pcalc[pq] / vm[pq] + ctx.gdiag[pq] * vm[pq]
                sysm.lo_val[self.tv_eid] = pcalc[pq] - ctx.gdiag[pq] * vm[pq] ** 2
            if len(self.jf):
                dth = va[self.jf] - va[self.jt]
                c, s = np.cos(dth), np.sin(dth)
                a_ft = self.g_ft * c + self.b_ft * s
                s_ft = self.g_ft * s - self.b_ft * c
                a_tf = self.g_tf * c - self.b_tf * s
                s_tf = -self.g_tf * s - self.b_tf * c
                vmf, vmt = vm[self.jf], vm[self.jt]
                vals = {
                    "VVS_ft": vmf * vmt * s_ft,
                    "VVS_tf": vmt * vmf * s_tf,
                    "VA_ft": vmf * a_ft,
                    "VA_tf": vmt * a_tf,
                    "mVVA_ft": -(vmf * vmt) * a_ft,
                    "mVVA_tf": -(vmt * vmf) * a_tf,
                    "VS_ft": vmf * s_ft,
                    "VS_tf": vmt * s_tf,
                }
                for kind, ((src_lo, eid_lo), (src_hi, eid_hi)) in self.maps.items():
                    v = vals[kind]
                    if len(src_lo):
                        np.add.at(sysm.lo_val, eid_lo, v[src_lo])
                    if len(src_hi):
                        np.add.at(sysm.hi_val, eid_hi, v[src_hi])
        return sysm

    def rhs(self, dP, dQ):
        ctx = self.ctx
        b = np.zeros(self.order_scalar)
        b[self.theta_slot[ctx.nonslack]] = dP
        if len(ctx.pq):
            b[self.v_slot[ctx.pq]] = dQ
        return b

    def solve_update(self, dP, dQ, vm, va):
        ctx = self.ctx
        with ctx.timer.phase("factor"):
            if self.factor is None:
                self.factor = numeric.factorize(self.system, workers=ctx.workers)
            else:
                numeric.refactorize_values(self.factor, self.system,
                                           workers=ctx.workers)
        with ctx.timer.phase("solve"):
            x = numeric.solve(self.factor, self.rhs(dP, dQ), workers=ctx.workers)
        va[ctx.nonslack] += x[self.theta_slot[ctx.nonslack]]
        if len(ctx.pq):
            vm[ctx.pq] += x[self.v_slot[ctx.pq]]


class _FdSystems:
    """XB-scheme constant matrices: B' (series reactance only, over all
    non-slack angles) and B'' (-imag of the phase-shift-free admittance,
    over PQ magnitudes). Both symmetric-valued; factored once."""

    def __init__(self, ctx: _Context):
        self.ctx = ctx
        g = ctx.g
        nr = len(ctx.nonslack)
        with ctx.timer.phase("symbolic"):
            pq_block = [1 if g.bus_type[ctx.bus_at_pos[p]] == PQ else 0
                        for p in range(nr)]
            self.bpp_analysis = symbolic.expand_analysis(ctx.bus_analysis, pq_block)
            self.qslot_of_bus = np.full(g.n, -1, dtype=np.int64)
            offs = np.concatenate(([0], np.cumsum(pq_block))).astype(np.int64)
            for b in ctx.pq:
                self.qslot_of_bus[b] = offs[ctx.pos_of_bus[b]]

        with ctx.timer.phase("assembly"):
            self.bp = numeric.SparseSystem(ctx.bus_analysis)
            for e in range(g.m):
                f, t = int(g.edge_from[e]), int(g.edge_to[e])
                bx = 1.0 / g.x[e]
                pf, pt = int(ctx.pos_of_bus[f]), int(ctx.pos_of_bus[t])
                if pf >= 0:
                    self.bp.diag[pf] += bx
                if pt >= 0:
                    self.bp.diag[pt] += bx
                if pf >= 0 and pt >= 0 and pf != pt:
                    self.bp.add_entry(pf, pt, -bx)
                    self.bp.add_entry(pt, pf, -bx)

            # admittance with phase shift removed keeps B'' symmetric
            ys = 1.0 / (g.r + 1j * g.x)
            ysh = 1j * g.b_charge / 2.0
            y_ff0 = (ys + ysh) / g.tap**2
            y_tt0 = ys + ysh
            y_off0 = -ys / g.tap
            diag0 = np.zeros(g.n, dtype=np.complex128)
            for i in range(g.n):
                acc = complex(g.gs[i], g.bs[i])
                for e in g.adjacency[i]:
                    acc += y_ff0[e] if g.edge_from[e] == i else y_tt0[e]
                diag0[i] = acc
            self.bpp = numeric.SparseSystem(self.bpp_analysis)
            for b in ctx.pq:
                self.bpp.diag[self.qslot_of_bus[b]] = -diag0.imag[b]
            for e in range(g.m):
                f, t = int(g.edge_from[e]), int(g.edge_to[e])
                qf, qt = int(self.qslot_of_bus[f]), int(self.qslot_of_bus[t])
                if qf >= 0 and qt >= 0 and qf != qt:
                    self.bpp.add_entry(qf, qt, -y_off0[e].imag)
                    self.bpp.add_entry(qt, qf, -y_off0[e].imag)

        with ctx.timer.phase("factor"):
            self.bp_factor = (
                numeric.factorize(self.bp, workers=ctx.workers)
                if nr else None
            )
            self.bpp_factor = (
                numeric.factorize(self.bpp, workers=ctx.workers)
                if len(ctx.pq) else None
            )

    def p_half(self, dP, vm, va):
        ctx = self.ctx
        rhs = np.zeros(len(ctx.nonslack))
        rhs[ctx.pos_of_bus[ctx.nonslack]] = dP / vm[ctx.nonslack]
        with ctx.timer.phase("solve"):
            x = numeric.solve(self.bp_factor, rhs, workers=ctx.workers)
        va[ctx.nonslack] += x[ctx.pos_of_bus[ctx.nonslack]]

    def q_half(self, dQ, vm):
        ctx = self.ctx
        if self.bpp_factor is None:
            return
        rhs = np.zeros(len(ctx.pq))
        rhs[self.qslot_of_bus[ctx.pq]] = dQ / vm[ctx.pq]
        with ctx.timer.phase("solve"):
            x = numeric.solve(self.bpp_factor, rhs, workers=ctx.workers)
        vm[ctx.pq] += x[self.qslot_of_bus[ctx.pq]]


def _initial_state(g: PowerSystemGraph, flat: bool):
    pinned = (g.bus_type == PV) | (g.bus_type == SLACK)
    if flat:
        vm = np.ones(g.n)
        va = np.zeros(g.n)
        va[g.slack] = g.va0[g.slack]
    else:
        vm = g.vm0.copy()
        va = g.va0.copy()
    vm[pinned] = g.vset[pinned]
    return vm, va


def _finish(ctx: _Context, method: str, iterations: int, converged: bool,
            vm, va, trace, t_start: float) -> PowerFlowSolution:
    g = ctx.g
    pcalc, qcalc = ctx.calc_injections(vm, va)
    dP = ctx.psched[ctx.nonslack] - pcalc[ctx.nonslack]
    dQ = ctx.qsched[ctx.pq] - qcalc[ctx.pq]
    V = vm * np.exp(1j * va)
    pf, qf, pt, qt = branch_flows(g, V)
    timings = ctx.timer.as_ms()
    timings["total"] = (time.perf_counter() - t_start) * 1e3
    return PowerFlowSolution(
        converged=converged,
        method_used=method,
        iterations=iterations,
        vm=vm,
        va=va,
        slack_p=float(pcalc[ctx.slack] + g.pd[ctx.slack]),
        slack_q=float(qcalc[ctx.slack] + g.qd[ctx.slack]),
        pv_q={int(g.bus_ids[b]): float(qcalc[b] + g.qd[b]) for b in ctx.pv},
        branch_from=[int(g.bus_ids[i]) for i in g.edge_from],
        branch_to=[int(g.bus_ids[i]) for i in g.edge_to],
        branch_pf=pf, branch_qf=qf, branch_pt=pt, branch_qt=qt,
        mismatch_trace=trace,
        max_mismatch=max(_max_abs(dP), _max_abs(dQ)),
        bus_ids=list(g.bus_ids),
        base_mva=g.base_mva,
        timings_ms=timings,
    )


def compute_mismatch(g: PowerSystemGraph, ybus: AdmittanceGraph, vm, va,
                     workers: int | None = None):
    """(dP over PV+PQ buses, dQ over PQ buses), scheduled minus calculated,
    both in ascending bus-index order."""
    ctx = _Context(g, workers=workers, ybus=ybus)
    return ctx.mismatch(np.ascontiguousarray(vm, dtype=float),
                        np.ascontiguousarray(va, dtype=float))


@dataclass
class NewtonAssembly:
    """A Newton step system plus the bus -> scalar slot maps needed to
    interpret it (slot -1 = variable not present)."""

    system: numeric.SparseSystem
    theta_slot: np.ndarray
    v_slot: np.ndarray


def build_newton_system(g: PowerSystemGraph, ybus: AdmittanceGraph, vm, va,
                        order: str = "natural") -> NewtonAssembly:
    """Polar Jacobian at (vm, va), restricted to the unknowns, variables
    interleaved per bus."""
    ctx = _Context(g, order_scheme=order, ybus=ybus)
    vm = np.asarray(vm, dtype=float)
    va = np.asarray(va, dtype=float)
    pcalc, qcalc = ctx.calc_injections(vm, va)
    newton = ctx.newton()
    newton.assemble(vm, va, pcalc, qcalc)
    return NewtonAssembly(newton.system, newton.theta_slot.copy(),
                          newton.v_slot.copy())


@dataclass
class FdAssembly:
    """B'/B'' systems plus bus -> row maps (B' rows are elimination
    positions of PV+PQ buses; B'' rows are PQ slots; -1 = absent)."""

    bp: numeric.SparseSystem
    bpp: numeric.SparseSystem
    bp_row: np.ndarray
    bpp_row: np.ndarray


def build_fd_systems(g: PowerSystemGraph, ybus: AdmittanceGraph,
                     order: str = "natural") -> FdAssembly:
    ctx = _Context(g, order_scheme=order, ybus=ybus)
    fd = ctx.fd()
    return FdAssembly(fd.bp, fd.bpp, ctx.pos_of_bus.copy(),
                      fd.qslot_of_bus.copy())


def _run_newton(ctx: _Context, config: PowerFlowConfig, vm, va):
    limit = config.iter_limit("newton")
    trace: list[tuple[float, float]] = []
    dP, dQ = ctx.mismatch(vm, va)
    iterations = 0
    while max(_max_abs(dP), _max_abs(dQ)) >= config.tol:
        if iterations >= limit:
            return iterations, False, trace
        newton = ctx.newton()
        newton.assemble(vm, va, ctx.pcalc, ctx.qcalc)
        newton.solve_update(dP, dQ, vm, va)
        dP, dQ = ctx.mismatch(vm, va)
        iterations += 1
        trace.append((_max_abs(dP), _max_abs(dQ)))
    return iterations, True, trace


def _run_fd(ctx: _Context, config: PowerFlowConfig, vm, va):
    limit = config.iter_limit("fast_decoupled")
    trace: list[tuple[float, float]] = []
    dP, dQ = ctx.mismatch(vm, va)
    iterations = 0
    while max(_max_abs(dP), _max_abs(dQ)) >= config.tol:
        if iterations >= limit:
            return iterations, False, trace
        fd = ctx.fd()
        fd.p_half(dP, vm, va)
        dP, dQ = ctx.mismatch(vm, va)
        fd.q_half(dQ, vm)
        dP, dQ = ctx.mismatch(vm, va)
        iterations += 1
        trace.append((_max_abs(dP), _max_abs(dQ)))
    return iterations, True, trace


def solve_newton(g: PowerSystemGraph, config: PowerFlowConfig | None = None
                 ) -> PowerFlowSolution:
    config = config or PowerFlowConfig(method="newton")
    t0 = time.perf_counter()
    ctx = _Context(g, order_scheme=config.order, workers=config.threads)
    vm, va = _initial_state(g, config.flat_start)
    iterations, converged, trace = _run_newton(ctx, config, vm, va)
    return _finish(ctx, "newton", iterations, converged, vm, va, trace, t0)


def solve_fast_decoupled(g: PowerSystemGraph,
                         config: PowerFlowConfig | None = None
                         ) -> PowerFlowSolution:
    config = config or PowerFlowConfig(method="fast_decoupled")
    t0 = time.perf_counter()
    ctx = _Context(g, order_scheme=config.order, workers=config.threads)
    vm, va = _initial_state(g, config.flat_start)
    iterations, converged, trace = _run_fd(ctx, config, vm, va)
    return _finish(ctx, "fast_decoupled", iterations, converged, vm, va,
                   trace, t0)


def solve_auto(g: PowerSystemGraph, config: PowerFlowConfig | None = None
               ) -> PowerFlowSolution:
    """Fast-decoupled first; if it fails to converge, Newton continues
    from the decoupled method's last iterate."""
    config = config or PowerFlowConfig(method="auto")
    t0 = time.perf_counter()
    ctx = _Context(g, order_scheme=config.order, workers=config.threads)
    vm, va = _initial_state(g, config.flat_start)
    fd_iter, fd_ok, fd_trace = _run_fd(ctx, config, vm, va)
    if fd_ok:
        return _finish(ctx, "fast_decoupled", fd_iter, True, vm, va,
                       fd_trace, t0)
    nr_iter, nr_ok, nr_trace = _run_newton(ctx, config, vm, va)
    return _finish(ctx, "newton", nr_iter, nr_ok, vm, va, nr_trace, t0)


def solve_power_flow(g: PowerSystemGraph,
                     config: PowerFlowConfig | None = None
                     ) -> PowerFlowSolution:
    config = config or PowerFlowConfig()
    if config.method == "newton":
        return solve_newton(g, config)
    if config.method == "fast_decoupled":
        return solve_fast_decoupled(g, config)
    return solve_auto(g, config)
