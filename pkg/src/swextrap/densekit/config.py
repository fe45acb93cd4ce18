"""Numerical tolerances shared by the kernels, overridable at runtime."""
from __future__ import annotations

import contextlib
import dataclasses


@dataclasses.dataclass
class Tolerances:
    hermitian: float = 1e-12
    max_sweeps: int = 64
    degeneracy: float = 1e-8
    pauli_drop: float = 1e-14
    sw_prune: float = 1e-14
    gadget: float = 1e-9
    term_cap: int = 1_000_000


TOL = Tolerances()


@contextlib.contextmanager
def override(**kwargs):
    """Temporarily replace tolerance defaults, e.g. ``override(hermitian=1e-10)``."""
    old = dataclasses.replace(TOL)
    for k, v in kwargs.items():
        if not hasattr(TOL, k):
            raise AttributeError(k)
        setattr(TOL, k, v)
    try:
        yield TOL
    finally:
        for f in dataclasses.fields(TOL):
            setattr(TOL, f.name, getattr(old, f.name))
