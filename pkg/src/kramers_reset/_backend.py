"""Kernel selection: compiled core when importable, numpy fallback otherwise.

Set ``KRAMERS_RESET_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernel

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

_KERNELS = {"python": _pykernel}
if _core is not None:
    _KERNELS["compiled"] = _core


def available() -> list[str]:
    return sorted(_KERNELS)


def default_name() -> str:
    want = os.environ.get("KRAMERS_RESET_BACKEND", "auto").strip().lower()
    if want in ("", "auto"):
        return "compiled" if _core is not None else "python"
    if want not in _KERNELS:
        raise RuntimeError(f"backend {want!r} unavailable; have {available()}")
    return want


def get(name: str | None = None):
    return _KERNELS[name or default_name()]


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get("KRAMERS_RESET_THREADS")
        threads = int(env) if env else 1
    return max(1, int(threads))
