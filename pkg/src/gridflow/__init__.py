"""gridflow: graph-based AC power flow with a level-scheduled parallel
sparse LDU solver.

The network is an attributed graph (buses with load/generation/shunt
attributes, branches with pi-model attributes). Admittance rows, power
mismatches, convergence checks and branch flows are nodal-parallel;
factorization and triangular solves are hierarchical-parallel over
elimination-tree levels. Hot kernels run in a compiled extension when
available, with a pure-Python twin selected automatically at import.
"""

from .case_io import (
    RawCase,
    load_case,
    parse_matpower,
    read_case,
    serialize_matpower,
    to_graph,
    write_solution,
)
from .netgraph import AdmittanceGraph, PowerSystemGraph, branch_flows, build_admittance
from .powerflow import (
    PowerFlowConfig,
    PowerFlowSolution,
    compute_mismatch,
    solve_auto,
    solve_fast_decoupled,
    solve_newton,
    solve_power_flow,
)

__version__ = "0.1.0"

__all__ = [
    "RawCase",
    "PowerSystemGraph",
    "AdmittanceGraph",
    "PowerFlowConfig",
    "PowerFlowSolution",
    "parse_matpower",
    "read_case",
    "load_case",
    "serialize_matpower",
    "to_graph",
    "write_solution",
    "build_admittance",
    "branch_flows",
    "compute_mismatch",
    "solve_newton",
    "solve_fast_decoupled",
    "solve_auto",
    "solve_power_flow",
    "__version__",
]
