"""Command-line interface: solve cases, inspect symbolic structure,
benchmark serial vs parallel execution and the two kernel backends.

Exit codes are a stable contract: 0 = converged, 1 = input or system
error, 2 = power flow did not converge.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import statistics
import sys

from . import case_io, numeric, symbolic
from .errors import GridFlowError
from .powerflow import PowerFlowConfig, solve_power_flow

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NOT_CONVERGED = 2

PHASES = ("assembly", "symbolic", "factor", "solve", "total")
NOT_NORMATIVE = "timings are hardware-dependent and not normative"


class _CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _CliError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gridflow", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    solve = sub.add_parser("solve", help="solve the AC power flow of a case")
    solve.add_argument("case", help="MATPOWER case file")
    solve.add_argument("--method", choices=["newton", "fd", "auto"],
                       default="auto")
    solve.add_argument("--tol", type=float, default=1e-8,
                       help="max-mismatch convergence tolerance in p.u.")
    solve.add_argument("--max-iter", type=int, default=None)
    solve.add_argument("--fd-max-iter", type=int, default=None,
                       help="iteration cap for the fast-decoupled attempt only")
    solve.add_argument("--flat-start", action="store_true")
    solve.add_argument("--threads", type=int, default=None)
    solve.add_argument("--order", choices=["natural", "mindeg"],
                       default="natural")
    solve.add_argument("--output", choices=["json", "csv", "table"],
                       default="table")
    solve.add_argument("--out", metavar="FILE", default=None,
                       help="write the payload to FILE instead of stdout")
    solve.set_defaults(func=cmd_solve)

    symb = sub.add_parser("symbolic",
                          help="show fill-in, tree and level structure")
    symb.add_argument("case")
    symb.add_argument("--order", choices=["natural", "mindeg"],
                      default="natural")
    symb.add_argument("--dump-levels", action="store_true",
                      help="print the full per-level node partition")
    symb.set_defaults(func=cmd_symbolic)

    bench = sub.add_parser("bench", help="benchmark solve phases")
    bench.add_argument("case")
    bench.add_argument("--repeat", type=int, default=10)
    bench.add_argument("--threads", default="4",
                       help="comma-separated parallel thread counts "
                            "(a serial run is always included)")
    bench.add_argument("--order", choices=["natural", "mindeg"],
                       default="natural")
    bench.add_argument("--backend",
                       choices=["active", "python", "compiled", "both"],
                       default="active")
    bench.add_argument("--per-level", action="store_true",
                       help="also time each elimination-tree level of one "
                            "triangular solve (Python kernel path)")
    bench.add_argument("--out", metavar="FILE", default=None,
                       help="also write the CSV block to FILE")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if getattr(args, "func", None) is None:
        parser.print_help()
        return EXIT_INPUT_ERROR
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except GridFlowError as exc:
        case = getattr(args, "case", None)
        prefix = f"{case}: " if case else ""
        print(f"error: {prefix}{exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


def cmd_solve(args) -> int:
    g = case_io.load_case(args.case)
    config = PowerFlowConfig(
        method=args.method, tol=args.tol, max_iter=args.max_iter,
        fd_max_iter=args.fd_max_iter, flat_start=args.flat_start,
        threads=args.threads, order=args.order,
    )
    sol = solve_power_flow(g, config)
    status = "converged" if sol.converged else "NOT converged"
    summary = (
        f"{status}: method={sol.method_used} iterations={sol.iterations} "
        f"max mismatch={sol.max_mismatch:.3e} p.u. "
        f"wall time={sol.timings_ms['total']:.2f} ms"
    )
    if args.output == "table":
        print(summary)
        _print_solution_table(sol)
    else:
        payload = case_io.write_solution(sol, args.output)
        if args.out:
            with open(args.out, "w") as f:
                f.write(payload)
            print(summary)
        else:
            print(summary, file=sys.stderr)
            sys.stdout.write(payload)
    return EXIT_OK if sol.converged else EXIT_NOT_CONVERGED


def _print_solution_table(sol) -> None:
    base = sol.base_mva
    print(f"slack injection: {sol.slack_p * base:.3f} MW, "
          f"{sol.slack_q * base:.3f} MVAr")
    print()
    print(f"{'bus':>6} {'vm [pu]':>10} {'va [deg]':>10}")
    for i, bus in enumerate(sol.bus_ids):
        print(f"{bus:>6} {sol.vm[i]:>10.5f} {math.degrees(sol.va[i]):>10.4f}")
    print()
    print(f"{'branch':>6} {'from':>5} {'to':>5} {'Pf [MW]':>10} "
          f"{'Qf [MVAr]':>10} {'Pt [MW]':>10} {'Qt [MVAr]':>10}")
    for e in range(len(sol.branch_from)):
        print(f"{e + 1:>6} {sol.branch_from[e]:>5} {sol.branch_to[e]:>5} "
              f"{sol.branch_pf[e] * base:>10.3f} {sol.branch_qf[e] * base:>10.3f} "
              f"{sol.branch_pt[e] * base:>10.3f} {sol.branch_qt[e] * base:>10.3f}")


def cmd_symbolic(args) -> int:
    g = case_io.load_case(args.case)
    edges = set()
    for e in range(g.m):
        f, t = int(g.edge_from[e]), int(g.edge_to[e])
        if f != t:
            edges.add((min(f, t), max(f, t)))
    pattern = symbolic.PatternGraph(g.n, sorted(edges))
    order = symbolic.reorder(pattern, args.order)
    analysis = symbolic.analyze(pattern, order)
    bus_at_pos = [0] * g.n
    for b, p in enumerate(order):
        bus_at_pos[p] = b
    widths = [len(lv) for lv in analysis.levels]
    print(f"nodes: {g.n}")
    print(f"original off-diagonal edges: {pattern.edge_count()}")
    print(f"fill edges: {len(analysis.fill_edges)}")
    print(f"tree height (levels): {analysis.height()}")
    print(f"level widths: {' '.join(str(w) for w in widths)}")
    if args.dump_levels:
        print()
        print("level  buses")
        for k, nodes in enumerate(analysis.levels, start=1):
            ids = sorted(g.bus_ids[bus_at_pos[p]] for p in nodes)
            print(f"{k:>5}  {','.join(str(i) for i in ids)}")
    return EXIT_OK


def cmd_bench(args) -> int:
    g = case_io.load_case(args.case)
    try:
        listed = sorted({int(tok) for tok in args.threads.split(",") if tok})
    except ValueError:
        raise _CliError(f"bad --threads list: {args.threads!r}") from None
    thread_counts = sorted({1, *listed})
    if args.repeat < 1:
        raise _CliError("--repeat must be >= 1")

    if args.backend == "both":
        backends = list(numeric.available_backends())
    elif args.backend == "active":
        backends = [numeric.active_backend()]
    else:
        backends = [args.backend]
    for name in backends:
        if name not in numeric.available_backends():
            raise _CliError(f"backend {name!r} is not available in this build")

    csv_blocks = []
    for backend in backends:
        with numeric.force_backend(backend):
            rows, deterministic = _bench_backend(g, args, thread_counts)
        print(f"backend: {backend}")
        print(f"case: {args.case}  repeats: {args.repeat}  ({NOT_NORMATIVE})")
        print(f"{'method':<16} {'threads':>7} " +
              " ".join(f"{p + ' ms':>12}" for p in PHASES))
        for (method, threads), medians in rows.items():
            print(f"{method:<16} {threads:>7} " +
                  " ".join(f"{medians[p]:>12.3f}" for p in PHASES))
        det = "yes" if deterministic else "NO"
        print(f"determinism: identical solutions across repeats and "
              f"thread counts: {det}")
        print()
        lines = ["phase,method,threads,ms"]
        for (method, threads), medians in rows.items():
            for p in PHASES:
                lines.append(f"{p},{method},{threads},{medians[p]!r}")
        csv_blocks.append(f"backend: {backend}\n" + "\n".join(lines) + "\n")
    csv_text = "\n".join(csv_blocks)
    sys.stdout.write(csv_text)
    if args.out:
        with open(args.out, "w") as f:
            f.write(csv_text)
    if args.per_level:
        _print_per_level(g, args)
    return EXIT_OK


def _print_per_level(g, args) -> None:
    """One instrumented triangular solve over the case's B' factor.

    The timer fires once per level barrier: first the forward phase in
    level order, then the backward phase in reverse level order.
    """
    import numpy as np

    from .netgraph import build_admittance
    from .powerflow import build_fd_systems

    fd = build_fd_systems(g, build_admittance(g), order=args.order)
    if fd.bp.n == 0:
        return
    factor = numeric.factorize(fd.bp)
    levels = fd.bp.analysis.levels
    nlev = len(levels)
    fwd = [[] for _ in range(nlev)]
    bwd = [[] for _ in range(nlev)]
    for _ in range(args.repeat):
        stamps: list[float] = []
        numeric.solve(factor, np.ones(fd.bp.n),
                      level_timer=lambda pos, s: stamps.append(s * 1e3))
        for k in range(nlev):
            fwd[k].append(stamps[k])
            bwd[nlev - 1 - k].append(stamps[nlev + k])
    print()
    print(f"per-level triangular solve times (median of {args.repeat}; "
          f"{NOT_NORMATIVE})")
    print(f"{'level':>5} {'width':>6} {'forward ms':>11} {'backward ms':>12}")
    for k in range(nlev):
        print(f"{k + 1:>5} {len(levels[k]):>6} "
              f"{statistics.median(fwd[k]):>11.4f} "
              f"{statistics.median(bwd[k]):>12.4f}")


def _bench_backend(g, args, thread_counts):
    rows = {}
    deterministic = True
    for method in ("newton", "fd"):
        digests = set()
        for threads in thread_counts:
            samples = {p: [] for p in PHASES}
            for _ in range(args.repeat):
                config = PowerFlowConfig(method=method, threads=threads,
                                         order=args.order)
                sol = solve_power_flow(g, config)
                if not sol.converged:
                    raise GridFlowError(
                        f"{method} did not converge while benchmarking"
                    )
                for p in PHASES:
                    samples[p].append(sol.timings_ms.get(p, 0.0))
                payload = case_io.write_solution(sol, "json")
                digests.add(hashlib.sha256(payload.encode()).hexdigest())
            rows[(sol.method_used, threads)] = {
                p: statistics.median(samples[p]) for p in PHASES
            }
        if len(digests) != 1:
            deterministic = False
    return rows, deterministic


if __name__ == "__main__":
    sys.exit(main())
