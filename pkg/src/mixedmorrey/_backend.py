"""Kernel backend selection.

The hot loops in :mod:`mixedmorrey.kernels` exist twice: a numba ``@njit``
version and a pure-numpy version.  ``MIXEDMORREY_BACKEND=numpy`` (or
``MIXEDMORREY_DISABLE_NUMBA=1``) forces the numpy path; otherwise numba is
used whenever it imports.
"""

from __future__ import annotations

import os
from contextlib import contextmanager

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_VALID = ("numba", "numpy")


def _initial_backend() -> str:
    if os.environ.get("MIXEDMORREY_DISABLE_NUMBA", "").strip() not in ("", "0"):
        return "numpy"
    name = os.environ.get("MIXEDMORREY_BACKEND", "numba").strip().lower()
    if name not in _VALID:
        raise ValueError(f"MIXEDMORREY_BACKEND must be one of {_VALID}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        return "numpy"
    return name


_backend = _initial_backend()


def njit(*args, **kws):
    """``numba.njit(cache=True, nogil=True)``, or a no-op without numba."""
    if not HAVE_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn
    kws.setdefault("cache", True)
    kws.setdefault("nogil", True)
    return numba.njit(*args, **kws)


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not importable")
    _backend = name


@contextmanager
def use_backend(name: str):
    previous = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)
