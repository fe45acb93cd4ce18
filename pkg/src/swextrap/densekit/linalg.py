"""Eigendecomposition, exponentials, norms and tensor plumbing."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, NonHermitian
from . import _backend
from . import precision as pr
from .config import TOL


@dataclass(frozen=True)
class EigDecomp:
    values: np.ndarray
    vectors: np.ndarray

    def values_float(self) -> np.ndarray:
        return pr.real_values(self.values)


def dagger(A: np.ndarray) -> np.ndarray:
    return np.conj(A).T


def _square(A: np.ndarray) -> None:
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")


def hermiticity_defect(A: np.ndarray) -> float:
    """max |A - A^H| relative to the Frobenius norm (an upper bound on ||A||_op)."""
    scale = float(pr.fro_norm(A))
    if scale == 0.0:
        return 0.0
    diff = pr.abs_array(A - dagger(A))
    return float(max(diff.ravel(), default=0)) / scale


def is_hermitian(A: np.ndarray, tol: float | None = None) -> bool:
    return hermiticity_defect(A) <= (TOL.hermitian if tol is None else tol)


def check_hermitian(A: np.ndarray, tol: float | None = None) -> None:
    _square(A)
    defect = hermiticity_defect(A)
    if defect > (TOL.hermitian if tol is None else tol):
        raise NonHermitian(f"Hermiticity defect {defect:.3e} exceeds tolerance")


def herm_eig(H, *, check: bool = True, backend: str | None = None) -> EigDecomp:
    """Ascending eigenvalues and unitary column eigenvectors of Hermitian ``H``."""
    H = np.asarray(H)
    if H.dtype != object:
        H = H.astype(complex)
    _square(H)
    if check:
        check_hermitian(H)
    H = (H + dagger(H)) / 2
    values, vectors = _backend.eigh(H, TOL.max_sweeps, backend)
    return EigDecomp(values, vectors)


def _taylor_order(like) -> int:
    """Smallest K with 0.5^(K+1)/(K+1)! below the unit roundoff."""
    eps = pr.epsilon(like)
    K, term = 0, 0.5
    while term > eps * 1e-2:
        K += 1
        term *= 0.5 / (K + 1)
    return K


def mat_exp(A) -> np.ndarray:
    """Matrix exponential.

    Hermitian and anti-Hermitian input go through the eigendecomposition (the
    latter of iA, so the result is unitary to working precision); everything
    else uses scaling and squaring of a fixed-order Taylor polynomial with
    ||A / 2^s||_op <= 0.5 (the Frobenius norm is used as the bound).
    """
    A = np.asarray(A)
    if A.dtype != object:
        A = A.astype(complex)
    _square(A)
    n = A.shape[0]
    ext = pr.is_extended(A)
    if n and is_hermitian(A):
        eig = herm_eig(A, check=False)
        w = np.array([pr.exp(v) for v in eig.values], dtype=object if ext else float)
        U = eig.vectors
        return (U * w) @ dagger(U)
    if n and pr.fro_norm(A) > 0 and is_hermitian(1j * A):
        eig = herm_eig(1j * A, check=False)
        w = np.array([pr.exp(-1j * v) for v in eig.values], dtype=object if ext else complex)
        U = eig.vectors
        return (U * w) @ dagger(U)
    norm = float(pr.fro_norm(A))
    s = 0 if norm <= 0.5 else int(math.ceil(math.log2(norm / 0.5)))
    B = A / (2 ** s)
    K = _taylor_order(A)
    I = pr.eye(n, A)
    E = I.copy()
    for k in range(K, 0, -1):
        E = I + (B @ E) / k
    for _ in range(s):
        E = E @ E
    return E


def op_norm(A) -> float:
    """Largest singular value.

    Computed from the eigendecomposition (of ``A`` if Hermitian, else of
    ``A^H A``) rather than power iteration, so clustered singular values cost
    nothing extra.
    """
    A = np.asarray(A)
    _square(A)
    if A.size == 0:
        return 0.0
    if is_hermitian(A):
        v = herm_eig(A, check=False).values_float()
        return float(max(abs(v[0]), abs(v[-1])))
    v = herm_eig(dagger(A) @ A, check=False).values_float()
    return math.sqrt(max(v[-1], 0.0))


def trace_norm(A) -> float:
    """Sum of singular values."""
    A = np.asarray(A)
    _square(A)
    if A.size == 0:
        return 0.0
    if is_hermitian(A):
        return float(np.sum(np.abs(herm_eig(A, check=False).values_float())))
    v = herm_eig(dagger(A) @ A, check=False).values_float()
    return float(np.sum(np.sqrt(np.clip(v, 0.0, None))))


def trace(A):
    A = np.asarray(A)
    _square(A)
    return np.trace(A) if A.dtype == object else complex(np.trace(A))


def kron(*mats) -> np.ndarray:
    out = np.asarray(mats[0])
    for M in mats[1:]:
        out = np.kron(out, np.asarray(M))
    return out


def _dims(lattice) -> list[int]:
    return list(lattice.local_dims) if hasattr(lattice, "local_dims") else list(lattice)


def embed(term, support, lattice) -> np.ndarray:
    """Place ``term`` on ``support`` (tensor factors in the given order) with identity elsewhere.

    Site 0 is the most-significant tensor factor of the result.
    """
    term = np.asarray(term)
    dims = _dims(lattice)
    n = len(dims)
    support = list(support)
    if len(set(support)) != len(support) or any(s < 0 or s >= n for s in support):
        raise DimensionMismatch(f"invalid support {support} for {n} sites")
    dsup = int(np.prod([dims[s] for s in support])) if support else 1
    if term.shape != (dsup, dsup):
        raise DimensionMismatch(f"term shape {term.shape} does not match support dimension {dsup}")
    rest = [s for s in range(n) if s not in support]
    drest = int(np.prod([dims[s] for s in rest])) if rest else 1
    full = np.kron(term, pr.eye(drest, term) if term.dtype == object else np.eye(drest))
    order = support + rest
    if order == list(range(n)):
        return full
    shape = [dims[s] for s in order]
    T = full.reshape(shape + shape)
    inv = list(np.argsort(order))
    T = T.transpose(inv + [n + i for i in inv])
    D = int(np.prod(dims))
    return T.reshape(D, D)


def partial_trace(A, lattice, keep) -> np.ndarray:
    """Trace out every site not in ``keep``; kept sites stay in ascending order."""
    A = np.asarray(A)
    dims = _dims(lattice)
    n = len(dims)
    D = int(np.prod(dims)) if dims else 1
    if A.shape != (D, D):
        raise DimensionMismatch(f"matrix shape {A.shape} does not match lattice dimension {D}")
    keep = sorted(set(keep))
    T = A.reshape(dims + dims)
    alive = list(range(n))
    for s in sorted(set(range(n)) - set(keep), reverse=True):
        pos = alive.index(s)
        T = np.trace(T, axis1=pos, axis2=pos + len(alive))
        alive.pop(pos)
    dk = int(np.prod([dims[s] for s in keep])) if keep else 1
    return T.reshape(dk, dk)
