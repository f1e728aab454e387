"""Backend selection for the hot kernels.

Kernels come in two flavours: a numba ``@njit`` loop and a numpy/pure-Python
path with identical results. ``KPAAC_BACKEND=numpy`` forces the fallback;
the default is numba when it imports.
"""

from __future__ import annotations

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

BACKENDS = ("numba", "numpy")


def _default_backend() -> str:
    flag = os.environ.get("KPAAC_BACKEND", "").strip().lower()
    if flag == "numpy" or not HAVE_NUMBA:
        return "numpy"
    return "numba"


DEFAULT_BACKEND = _default_backend()


def njit(func):
    """Compile ``func`` with numba when available, else return it unchanged."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def resolve(backend: str | None) -> str:
    if backend is None:
        return DEFAULT_BACKEND
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend
