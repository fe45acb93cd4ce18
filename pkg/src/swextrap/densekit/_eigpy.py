"""Pure-Python Hermitian eigensolver.

Householder reduction to a real symmetric tridiagonal matrix followed by the
implicit-shift QL iteration.  Array operations are vectorised with numpy and
scalar bookkeeping uses the helpers in :mod:`precision`, so the same code runs
on ``complex128`` arrays and on gmpy2 object arrays.
"""
from __future__ import annotations

import numpy as np

from ..errors import NoConvergence
from . import precision as pr


def tridiagonalize(A: np.ndarray):
    """Return ``(d, e, Q)`` with ``A = Q T Q^H``.

    ``T`` is real symmetric tridiagonal with diagonal ``d`` and subdiagonal
    ``e`` (length n-1).
    """
    n = A.shape[0]
    A = A.copy()
    Q = pr.eye(n, A)
    for k in range(n - 2):
        x = A[k + 1:, k].copy()
        xnorm = pr.fro_norm(x)
        if xnorm == 0:
            continue
        x0 = x[0]
        ax0 = abs(x0)
        phase = x0 / ax0 if ax0 != 0 else pr.scalar(1.0, A)
        alpha = -phase * xnorm
        x[0] = x0 - alpha
        u = x / pr.fro_norm(x)
        uc = u.conj()
        A22 = A[k + 1:, k + 1:]
        p = A22 @ u
        K = uc @ p
        w = p - K * u
        A[k + 1:, k + 1:] = A22 - 2 * np.outer(u, w.conj()) - 2 * np.outer(w, uc)
        A[k + 1, k] = alpha
        A[k, k + 1] = alpha.conjugate() if hasattr(alpha, "conjugate") else np.conj(alpha)
        A[k + 2:, k] = 0
        A[k, k + 2:] = 0
        Qs = Q[:, k + 1:]
        Q[:, k + 1:] = Qs - 2 * np.outer(Qs @ u, uc)

    d = [pr.real(A[i, i]) for i in range(n)]
    e = []
    phi = pr.scalar(1.0, A)
    for k in range(n - 1):
        ek = A[k + 1, k]
        aek = abs(ek)
        e.append(pr.real(aek))
        if aek != 0:
            phi = phi * ek / aek
        Q[:, k + 1] = Q[:, k + 1] * phi
    return d, e, Q


def tql(d: list, e: list, Zt: np.ndarray, max_sweeps: int = 64) -> None:
    """Implicit-shift QL on a symmetric tridiagonal matrix, in place.

    ``e`` holds the subdiagonal (length n-1).  ``Zt`` stores eigenvectors as
    rows; rotations are applied to pairs of rows.
    """
    n = len(d)
    if n == 0:
        return
    e = list(e) + [d[0] * 0]
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) + dd == dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_sweeps:
                raise NoConvergence(f"QL iteration exceeded {max_sweeps} sweeps for eigenvalue {l}")
            it += 1
            g = (d[l + 1] - d[l]) / (2 * e[l])
            r = pr.hypot(g, 1)
            g = d[m] - d[l] + e[l] / (g + (abs(r) if g >= 0 else -abs(r)))
            s = c = g * 0 + 1
            p = g * 0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = pr.hypot(f, g)
                e[i + 1] = r
                if r == 0:
                    d[i + 1] -= p
                    e[m] = r * 0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi1 = Zt[i + 1].copy()
                zi = Zt[i]
                Zt[i + 1] = s * zi + c * zi1
                Zt[i] = c * zi - s * zi1
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = g * 0


def eigh(A: np.ndarray, max_sweeps: int = 64):
    """Eigenvalues (ascending) and column eigenvectors of Hermitian ``A``."""
    n = A.shape[0]
    if n == 1:
        return [pr.real(A[0, 0])], pr.eye(1, A)
    d, e, Q = tridiagonalize(A)
    Zt = Q.T.copy()
    tql(d, e, Zt, max_sweeps)
    order = sorted(range(n), key=lambda i: d[i])
    values = [d[i] for i in order]
    vectors = Zt[order].T.copy()
    return values, vectors
