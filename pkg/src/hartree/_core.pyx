# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: angular kernel quadrature and row-parallel products.

Every output element is produced by exactly one thread with a fixed
summation order, so results do not depend on the thread count.
"""

import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport M_PI, ceil, fmin, log2, sin, sqrt, fmax

cnp.import_array()

cdef enum:
    NGAUSS = 12

cdef double GX[NGAUSS]
cdef double GW[NGAUSS]

_x, _w = np.polynomial.legendre.leggauss(NGAUSS)
for _k in range(NGAUSS):
    GX[_k] = 0.5 * (_x[_k] + 1.0)
    GW[_k] = 0.5 * _w[_k]


cdef inline double _ipow(double x, int n) noexcept nogil:
    cdef double out = 1.0
    cdef int k
    for k in range(n):
        out *= x
    return out


cdef double _angular(double t, int sin_power) noexcept nogil:
    # int_0^pi sin^p(th) / (1 + t^2 - 2 t cos th)^2 dth, panels doubling away from th=0
    cdef double width, e0, a, b, th, s, d, acc, one_mt
    cdef int npan, k, g
    one_mt = 1.0 - t
    if t > 0.0:
        width = fmax(one_mt / sqrt(t), 1e-14)
    else:
        width = M_PI
    e0 = fmin(width, 0.25 * M_PI)
    npan = <int>ceil(log2(M_PI / e0)) + 1
    acc = 0.0
    a = 0.0
    b = e0
    for k in range(npan):
        if b > M_PI:
            b = M_PI
        if b > a:
            for g in range(NGAUSS):
                th = a + (b - a) * GX[g]
                s = sin(0.5 * th)
                d = one_mt * one_mt + 4.0 * t * s * s
                acc += (b - a) * GW[g] * _ipow(sin(th), sin_power) / (d * d)
        a = b
        b = 2.0 * b
    return acc


def angular_integral(const double[::1] t, int N, int num_threads=1):
    """Return int_0^pi sin^(N-2) / (1 + t^2 - 2 t cos)^2 for each t in [0, 1]."""
    cdef Py_ssize_t n = t.shape[0], i
    out = np.empty(n)
    cdef double[::1] o = out
    cdef int p = N - 2
    for i in prange(n, nogil=True, num_threads=num_threads, schedule="static"):
        o[i] = _angular(t[i], p)
    return out


def pair_kernel(const double[::1] r, int N, int exponent, int num_threads=1):
    """Dense max(r,s)^-exponent * angular(min/max) over all node pairs.

    The diagonal is left at zero; it is corrected by the caller.
    """
    cdef Py_ssize_t n = r.shape[0], i, j
    out = np.zeros((n, n))
    cdef double[:, ::1] o = out
    cdef int p = N - 2
    cdef double mx, mn, val
    for i in prange(n, nogil=True, num_threads=num_threads, schedule="dynamic"):
        for j in range(i + 1, n):
            mx = fmax(r[i], r[j])
            mn = fmin(r[i], r[j])
            if mx > 0.0:
                val = _angular(mn / mx, p) / _ipow(mx, exponent)
                o[i, j] = val
    for i in range(n):
        for j in range(i + 1, n):
            o[j, i] = o[i, j]
    return out


def row_matvec(const double[:, ::1] a, const double[::1] x, int num_threads=1):
    """y = a @ x with one thread per row and sequential row sums."""
    cdef Py_ssize_t n = a.shape[0], m = a.shape[1], i, j
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double acc
    for i in prange(n, nogil=True, num_threads=num_threads, schedule="static"):
        acc = 0.0
        for j in range(m):
            acc = acc + a[i, j] * x[j]
        o[i] = acc
    return out
