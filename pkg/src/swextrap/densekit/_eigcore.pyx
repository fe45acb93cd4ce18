# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Householder + implicit-shift QL Hermitian eigensolver (complex128)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, hypot

cnp.import_array()


cdef inline double cabs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


def tridiagonalize(A_in):
    """Return (d, e, Q) with A = Q T Q^H, T real symmetric tridiagonal."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] Aarr = np.array(A_in, dtype=np.complex128, order="C")
    cdef double complex[:, ::1] A = Aarr
    cdef Py_ssize_t n = A.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] Qarr = np.eye(n, dtype=np.complex128)
    cdef double complex[:, ::1] Q = Qarr
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] uarr = np.zeros(n, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] parr = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] u = uarr
    cdef double complex[::1] p = parr
    cdef Py_ssize_t k, i, j, m
    cdef double xnorm, ax0, unorm
    cdef double complex x0, phase, alpha, K, s
    cdef cnp.ndarray[cnp.float64_t, ndim=1] darr = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] earr = np.zeros(max(n - 1, 0))
    cdef double complex ek, phi

    with nogil:
        for k in range(n - 2):
            m = n - k - 1
            xnorm = 0.0
            for i in range(m):
                xnorm += cabs2(A[k + 1 + i, k])
            xnorm = sqrt(xnorm)
            if xnorm == 0.0:
                continue
            x0 = A[k + 1, k]
            ax0 = sqrt(cabs2(x0))
            if ax0 != 0.0:
                phase = x0 / ax0
            else:
                phase = 1.0
            alpha = -phase * xnorm
            unorm = 0.0
            for i in range(m):
                u[i] = A[k + 1 + i, k]
            u[0] = x0 - alpha
            for i in range(m):
                unorm += cabs2(u[i])
            unorm = sqrt(unorm)
            for i in range(m):
                u[i] = u[i] / unorm
            # p = A22 u ; K = u^H p ; w = p - K u
            K = 0.0
            for i in range(m):
                s = 0.0
                for j in range(m):
                    s = s + A[k + 1 + i, k + 1 + j] * u[j]
                p[i] = s
            for i in range(m):
                K = K + u[i].conjugate() * p[i]
            for i in range(m):
                p[i] = p[i] - K * u[i]
            for i in range(m):
                for j in range(m):
                    A[k + 1 + i, k + 1 + j] = (A[k + 1 + i, k + 1 + j]
                                               - 2.0 * u[i] * p[j].conjugate()
                                               - 2.0 * p[i] * u[j].conjugate())
            A[k + 1, k] = alpha
            A[k, k + 1] = alpha.conjugate()
            for i in range(k + 2, n):
                A[i, k] = 0.0
                A[k, i] = 0.0
            # Q[:, k+1:] -= 2 (Q[:, k+1:] u) u^H
            for i in range(n):
                s = 0.0
                for j in range(m):
                    s = s + Q[i, k + 1 + j] * u[j]
                for j in range(m):
                    Q[i, k + 1 + j] = Q[i, k + 1 + j] - 2.0 * s * u[j].conjugate()

        phi = 1.0
        for i in range(n):
            darr[i] = A[i, i].real
        for k in range(n - 1):
            ek = A[k + 1, k]
            earr[k] = sqrt(cabs2(ek))
            if earr[k] != 0.0:
                phi = phi * ek / earr[k]
            for i in range(n):
                Q[i, k + 1] = Q[i, k + 1] * phi
    return darr, earr, Qarr


def tql(d_in, e_in, Zt_in, int max_sweeps=64):
    """Implicit-shift QL, in place on d (diagonal) and Zt (eigenvectors as rows).

    Returns -1 on success or the index of the eigenvalue that failed to converge.
    """
    cdef double[::1] d = d_in
    cdef Py_ssize_t n = d.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] earr = np.zeros(n)
    cdef double[::1] e = earr
    cdef double complex[:, ::1] Z = Zt_in
    cdef Py_ssize_t l, m, i, k, ncol = Z.shape[1]
    cdef int it, fail = -1
    cdef double dd, g, r, s, c, p, f, b
    cdef double complex zi, zi1
    cdef bint underflow
    for i in range(n - 1):
        e[i] = e_in[i]
    with nogil:
        for l in range(n):
            it = 0
            while True:
                m = l
                while m < n - 1:
                    dd = fabs(d[m]) + fabs(d[m + 1])
                    if fabs(e[m]) + dd == dd:
                        break
                    m += 1
                if m == l:
                    break
                if it == max_sweeps:
                    fail = l
                    break
                it += 1
                g = (d[l + 1] - d[l]) / (2.0 * e[l])
                r = hypot(g, 1.0)
                if g >= 0:
                    g = d[m] - d[l] + e[l] / (g + fabs(r))
                else:
                    g = d[m] - d[l] + e[l] / (g - fabs(r))
                s = 1.0
                c = 1.0
                p = 0.0
                underflow = False
                i = m - 1
                while i >= l:
                    f = s * e[i]
                    b = c * e[i]
                    r = hypot(f, g)
                    e[i + 1] = r
                    if r == 0.0:
                        d[i + 1] -= p
                        e[m] = 0.0
                        underflow = True
                        break
                    s = f / r
                    c = g / r
                    g = d[i + 1] - p
                    r = (d[i] - g) * s + 2.0 * c * b
                    p = s * r
                    d[i + 1] = g + p
                    g = c * r - b
                    for k in range(ncol):
                        zi1 = Z[i + 1, k]
                        zi = Z[i, k]
                        Z[i + 1, k] = s * zi + c * zi1
                        Z[i, k] = c * zi - s * zi1
                    i -= 1
                if underflow:
                    continue
                d[l] -= p
                e[l] = g
                e[m] = 0.0
            if fail >= 0:
                break
    return fail
