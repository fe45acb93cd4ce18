"""Scalar arithmetic that works for both double and gmpy2 extended precision.

Matrices in extended precision are numpy object arrays holding ``gmpy2.mpc``
entries.  Every routine in the package that must survive tiny expansion
parameters goes through the helpers here so the same code path handles
``complex128`` and object arrays.
"""
from __future__ import annotations

import cmath
import contextlib
import math

import gmpy2
import numpy as np

DEFAULT_BITS = 256

_MPFR = type(gmpy2.mpfr(0))
_MPC = type(gmpy2.mpc(0))


def is_extended(A) -> bool:
    if isinstance(A, np.ndarray):
        return A.dtype == object
    return isinstance(A, (_MPFR, _MPC))


def current_bits() -> int:
    return gmpy2.get_context().precision


@contextlib.contextmanager
def extended(bits: int = DEFAULT_BITS):
    """Run a block with the gmpy2 working precision set to ``bits``."""
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        yield


def epsilon(A) -> float:
    """Unit roundoff for the arithmetic ``A`` is stored in."""
    if is_extended(A):
        return 2.0 ** (-current_bits())
    return float(np.finfo(float).eps)


def to_extended(A) -> np.ndarray:
    A = np.asarray(A)
    if A.dtype == object:
        return np.vectorize(gmpy2.mpc, otypes=[object])(A) if A.size else A.copy()
    flat = [gmpy2.mpc(complex(z)) for z in A.ravel()]
    out = np.empty(A.shape, dtype=object)
    out.ravel()[:] = flat if flat else []
    return out


def to_double(A) -> np.ndarray:
    A = np.asarray(A)
    if A.dtype != object:
        return A.astype(complex)
    out = np.array([complex(z) for z in A.ravel()], dtype=complex)
    return out.reshape(A.shape)


def real_values(v) -> np.ndarray:
    """Convert an array of real scalars (float or mpfr) to float64."""
    return np.array([float(a) for a in np.ravel(v)], dtype=float).reshape(np.shape(v))


def zeros(shape, like) -> np.ndarray:
    if is_extended(like):
        out = np.empty(shape, dtype=object)
        out.ravel()[:] = [gmpy2.mpc(0)] * out.size
        return out
    return np.zeros(shape, dtype=complex)


def eye(n: int, like) -> np.ndarray:
    out = zeros((n, n), like)
    one = gmpy2.mpc(1) if is_extended(like) else 1.0
    for i in range(n):
        out[i, i] = one
    return out


def asarray_like(A, like) -> np.ndarray:
    """Cast ``A`` into the arithmetic of ``like``."""
    if is_extended(like):
        return to_extended(A)
    return np.asarray(A, dtype=complex) if not is_extended(A) else to_double(A)


def scalar(value, like):
    """A scalar constant in the arithmetic of ``like``."""
    if is_extended(like):
        if isinstance(value, complex):
            return gmpy2.mpc(value)
        return gmpy2.mpfr(value) if not isinstance(value, (_MPFR, _MPC)) else value
    return value


def sqrt(a):
    if isinstance(a, (_MPFR, _MPC)):
        return gmpy2.sqrt(a)
    if isinstance(a, complex):
        return cmath.sqrt(a)
    return math.sqrt(a)


def exp(a):
    if isinstance(a, (_MPFR, _MPC)):
        return gmpy2.exp(a)
    if isinstance(a, complex):
        return cmath.exp(a)
    return math.exp(a)


def log(a):
    if isinstance(a, (_MPFR, _MPC)):
        return gmpy2.log(a)
    return math.log(a)


def hypot(a, b):
    if isinstance(a, _MPFR) or isinstance(b, _MPFR):
        return gmpy2.hypot(gmpy2.mpfr(a), gmpy2.mpfr(b))
    return math.hypot(a, b)


def real(z):
    if isinstance(z, _MPC):
        return z.real
    if isinstance(z, _MPFR):
        return z
    return float(np.real(z))


def abs_array(A) -> np.ndarray:
    """Elementwise modulus; returns float64 for double input, mpfr objects otherwise."""
    if is_extended(A):
        out = np.empty(np.shape(A), dtype=object)
        out.ravel()[:] = [abs(z) for z in np.ravel(A)]
        return out
    return np.abs(A)


def fro_norm(A):
    """Frobenius norm in the arithmetic of ``A``."""
    if is_extended(A):
        s = gmpy2.mpfr(0)
        for z in np.ravel(A):
            s += z.real * z.real + z.imag * z.imag
        return gmpy2.sqrt(s)
    return float(np.linalg.norm(A))
