# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the numpy kernels in covlqr._fallback.

Same svec convention as covlqr.kernels: lower triangle, column-major,
off-diagonal entries scaled by sqrt(2).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()


def symkron(double[:, ::1] r):
    """svec-coordinate matrix of the congruence map X -> R^T X R."""
    cdef Py_ssize_t n = r.shape[0]
    cdef Py_ssize_t ntri = n * (n + 1) // 2
    out = np.empty((ntri, ntri), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t k, l, p, q, ri, ci
    cdef double sr, t, root2 = sqrt(2.0)
    ri = 0
    for l in range(n):
        for k in range(l, n):
            sr = 1.0 if k == l else root2
            ci = 0
            for q in range(n):
                for p in range(q, n):
                    t = r[p, k] * r[q, l] + r[q, k] * r[p, l]
                    if p == q:
                        o[ri, ci] = 0.5 * sr * t
                    else:
                        o[ri, ci] = sr / root2 * t
                    ci += 1
            ri += 1
    return out


def svec(double[:, ::1] m):
    """Scaled lower-triangle vectorization; matches kernels.svec exactly."""
    cdef Py_ssize_t n = m.shape[0]
    out = np.empty(n * (n + 1) // 2, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j, k = 0
    cdef double root2 = sqrt(2.0)
    for j in range(n):
        o[k] = m[j, j]
        k += 1
        for i in range(j + 1, n):
            o[k] = root2 * m[i, j]
            k += 1
    return out


def smat(double[::1] v, Py_ssize_t n):
    """Inverse of svec."""
    out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, k = 0
    cdef double val, inv_root2 = 1.0 / sqrt(2.0)
    for j in range(n):
        o[j, j] = v[k]
        k += 1
        for i in range(j + 1, n):
            val = v[k] * inv_root2
            o[i, j] = val
            o[j, i] = val
            k += 1
    return out


def rollout(double[:, ::1] a, double[:, ::1] b, double[::1] x0,
            double[:, ::1] u, double[:, ::1] w, double limit):
    """State recursion x(k+1) = A x(k) + B u(k) + w(k); see _fallback."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[1]
    cdef Py_ssize_t t_len = u.shape[1]
    x_arr = np.zeros((n, t_len + 1), dtype=np.float64)
    cdef double[:, ::1] x = x_arr
    cdef double[::1] cur = np.empty(n, dtype=np.float64)
    cdef double[::1] nxt = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i, j, k
    cdef double acc, biggest
    for i in range(n):
        cur[i] = x0[i]
        x[i, 0] = x0[i]
    for k in range(t_len):
        biggest = 0.0
        for i in range(n):
            acc = w[i, k]
            for j in range(n):
                acc += a[i, j] * cur[j]
            for j in range(m):
                acc += b[i, j] * u[j, k]
            nxt[i] = acc
            if fabs(acc) > biggest:
                biggest = fabs(acc)
        for i in range(n):
            cur[i] = nxt[i]
            x[i, k + 1] = nxt[i]
        if biggest > limit:
            return x_arr, True
    return x_arr, False
