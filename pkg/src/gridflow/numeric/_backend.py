"""Kernel backend selection.

The compiled extension is used when importable; otherwise the pure-Python
twin. GRIDFLOW_KERNELS=python|compiled overrides at import, and
``force_backend`` switches at runtime (used by tests and the benchmark).
"""

from __future__ import annotations

import os
from contextlib import contextmanager

from . import _kernels_py

try:
    from . import _kernels  # type: ignore[attr-defined]
except ImportError:
    _kernels = None

_BY_NAME = {"python": _kernels_py}
if _kernels is not None:
    _BY_NAME["compiled"] = _kernels


def _initial():
    env = os.environ.get("GRIDFLOW_KERNELS")
    if env:
        if env not in _BY_NAME:
            raise ImportError(
                f"GRIDFLOW_KERNELS={env!r} but that backend is unavailable "
                f"(have: {', '.join(sorted(_BY_NAME))})"
            )
        return _BY_NAME[env]
    return _BY_NAME.get("compiled", _kernels_py)


_active = _initial()


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BY_NAME))


def active_backend() -> str:
    return _active.NAME


def kernels():
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in _BY_NAME:
        raise ValueError(
            f"backend {name!r} unavailable (have: {', '.join(sorted(_BY_NAME))})"
        )
    _active = _BY_NAME[name]


@contextmanager
def force_backend(name: str):
    previous = _active.NAME
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)
