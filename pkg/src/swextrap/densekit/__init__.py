"""Dense complex-matrix kernel."""
from ._backend import BACKEND
from .config import TOL, Tolerances, override
from .linalg import (
    EigDecomp,
    check_hermitian,
    dagger,
    embed,
    herm_eig,
    is_hermitian,
    kron,
    mat_exp,
    op_norm,
    partial_trace,
    trace,
    trace_norm,
)
from .precision import DEFAULT_BITS, extended, is_extended, to_double, to_extended

__all__ = [
    "BACKEND", "TOL", "Tolerances", "override", "EigDecomp", "check_hermitian", "dagger",
    "embed", "herm_eig", "is_hermitian", "kron", "mat_exp", "op_norm", "partial_trace",
    "trace", "trace_norm", "DEFAULT_BITS", "extended", "is_extended", "to_double", "to_extended",
]
