"""Deterministic parallel execution substrate.

Two contracts are provided and relied on by the numeric layer:

* ``run_nodal``: embarrassingly parallel over node indices. Every task
  writes only its own output slot and reads only immutable input, so the
  result is independent of worker count and scheduling.
* ``run_levels``: level sets separated by full barriers. A node's task
  may read only results finalized in strictly earlier levels (forward
  direction) or strictly later levels (backward direction).

Single-threaded execution is always a legal schedule and must produce
bit-identical output; the tests hold every computation routed through
here to that standard.
"""

from __future__ import annotations

import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence

# Levels smaller than this run inline on the calling thread: dispatch
# overhead would otherwise dominate the deep, narrow top of a typical
# elimination tree (level widths shrink toward the root).
SMALL_LEVEL_CUTOFF = 16

_ENV_WORKERS = "GRIDFLOW_WORKERS"

_pools: dict[int, ThreadPoolExecutor] = {}
_pools_lock = threading.Lock()


def default_workers() -> int:
    """Worker count: $GRIDFLOW_WORKERS if set, else hardware parallelism."""
    env = os.environ.get(_ENV_WORKERS)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def resolve_workers(workers: int | None) -> int:
    return default_workers() if workers is None else max(1, int(workers))


def _pool(workers: int) -> ThreadPoolExecutor:
    with _pools_lock:
        pool = _pools.get(workers)
        if pool is None:
            pool = ThreadPoolExecutor(max_workers=workers)
            _pools[workers] = pool
        return pool


def _run_indices(task: Callable[[int], None], indices: Sequence[int], workers: int) -> None:
    """Run task(i) for every i; on failures, re-raise the lowest-index one."""
    if workers <= 1 or len(indices) < 2:
        for i in indices:
            task(i)
        return
    failures: list[tuple[int, BaseException]] = []
    lock = threading.Lock()

    def guarded(i: int) -> None:
        try:
            task(i)
        except BaseException as exc:
            with lock:
                failures.append((i, exc))

    futures = [_pool(workers).submit(guarded, i) for i in indices]
    for f in futures:
        f.result()
    if failures:
        failures.sort(key=lambda pair: pair[0])
        raise failures[0][1]


def run_nodal(
    task: Callable[[int], None],
    indices: Sequence[int],
    workers: int | None = None,
) -> None:
    """Execute independent per-node tasks.

    When several tasks fail, the failure with the lowest task index is the
    one propagated, regardless of scheduling.
    """
    _run_indices(task, indices, resolve_workers(workers))


def run_levels(
    levels: Iterable[Sequence[int]],
    task: Callable[[int], None],
    workers: int | None = None,
    direction: str = "forward",
    cutoff: int = SMALL_LEVEL_CUTOFF,
    level_timer: Callable[[int, float], None] | None = None,
) -> None:
    """Execute per-node tasks level by level with a barrier between levels.

    ``direction`` is "forward" (level order as given) or "backward"
    (reversed). ``level_timer``, if given, receives (level position in
    execution order, elapsed seconds) after each barrier.
    """
    if direction not in ("forward", "backward"):
        raise ValueError(f"unknown direction: {direction!r}")
    w = resolve_workers(workers)
    seq = list(levels)
    if direction == "backward":
        seq.reverse()
    for pos, nodes in enumerate(seq):
        t0 = time.perf_counter() if level_timer else 0.0
        _run_indices(task, nodes, 1 if len(nodes) < cutoff else w)
        if level_timer:
            level_timer(pos, time.perf_counter() - t0)
