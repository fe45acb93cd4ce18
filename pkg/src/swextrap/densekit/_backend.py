"""Select the compiled eigensolver when available, else the numpy fallback.

Set ``SWEXTRAP_BACKEND=python`` to force the fallback.
"""
from __future__ import annotations

import os

import numpy as np

from ..errors import NoConvergence
from . import _eigpy

try:
    if os.environ.get("SWEXTRAP_BACKEND", "").lower() == "python":
        raise ImportError("fallback forced by environment")
    from . import _eigcore
except ImportError:  # pragma: no cover - depends on build
    _eigcore = None

BACKEND = "compiled" if _eigcore is not None else "python"


def _eigh_compiled(A: np.ndarray, max_sweeps: int):
    n = A.shape[0]
    d, e, Q = _eigcore.tridiagonalize(A)
    Zt = np.ascontiguousarray(Q.T)
    fail = _eigcore.tql(d, e, Zt, max_sweeps)
    if fail >= 0:
        raise NoConvergence(f"QL iteration exceeded {max_sweeps} sweeps for eigenvalue {fail}")
    order = np.argsort(d, kind="stable")
    return d[order], Zt[order].T.copy() if n else Zt


def _eigh_python(A: np.ndarray, max_sweeps: int):
    values, vectors = _eigpy.eigh(A, max_sweeps)
    if A.dtype == object:
        return np.array(values, dtype=object), vectors
    return np.array(values, dtype=float), vectors


def eigh(A: np.ndarray, max_sweeps: int = 64, backend: str | None = None):
    """Dispatch to a backend; object arrays always use the generic fallback."""
    backend = backend or BACKEND
    if A.dtype == object or backend == "python" or _eigcore is None:
        return _eigh_python(A, max_sweeps)
    return _eigh_compiled(np.ascontiguousarray(A, dtype=complex), max_sweeps)
