# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scalar kernels; see ``_kernels_py.py`` for the reference twin."""
from libc.math cimport log, exp, INFINITY

import numpy as np

LOG_CAP = 1000.0
cdef double _CAP = 1000.0


cdef inline double _block_value(double qs, double as_) nogil:
    if qs <= 0.0:
        return -INFINITY
    if as_ <= 0.0:
        return INFINITY
    return log(qs / as_)


def kl_dual_sorted(q, alpha):
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef double[::1] av = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef Py_ssize_t n = qv.shape[0]
    cdef Py_ssize_t[::1] starts = np.empty(n + 1, dtype=np.intp)
    cdef double[::1] qsum = np.empty(n, dtype=np.float64)
    cdef double[::1] asum = np.empty(n, dtype=np.float64)
    cdef double[::1] val = np.empty(n, dtype=np.float64)
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] x = out
    cdef Py_ssize_t top = 0, i, b, e
    cdef double v
    with nogil:
        for i in range(n):
            starts[top] = i
            qsum[top] = qv[i]
            asum[top] = av[i]
            val[top] = _block_value(qsum[top], asum[top])
            top += 1
            while top > 1 and val[top - 2] < val[top - 1]:
                qsum[top - 2] += qsum[top - 1]
                asum[top - 2] += asum[top - 1]
                top -= 1
                val[top - 1] = _block_value(qsum[top - 1], asum[top - 1])
        starts[top] = n
        for b in range(top):
            v = val[b]
            if v > _CAP:
                v = _CAP
            elif v < 0.0:
                v = 0.0
            for e in range(starts[b], starts[b + 1]):
                x[e] = v
    return out


cdef inline double _one_minus_tail(double x) nogil:
    cdef double x2
    if x < 1e-2:
        x2 = x * x
        return x2 * (0.5 - x / 3.0 + x2 / 8.0 - x2 * x / 30.0)
    return 1.0 - exp(-x) * (1.0 + x)


def kl_projection_gap(q, x):
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double total = 0.0
    cdef Py_ssize_t i
    for i in range(qv.shape[0]):
        if qv[i] > 0.0 and xv[i] > 0.0:
            total += qv[i] * _one_minus_tail(xv[i])
    return total


def gen_kl(p, q):
    cdef double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef double total = 0.0
    cdef Py_ssize_t i
    for i in range(pv.shape[0]):
        if pv[i] > 0.0:
            if qv[i] <= 0.0:
                return INFINITY
            total += pv[i] * log(pv[i] / qv[i]) - pv[i] + qv[i]
        else:
            total += qv[i]
    return total


cdef double _slope(double[::1] nu, double[::1] w, double k, double z) nogil:
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(nu.shape[0]):
        if w[i] > 0.0 and nu[i] > 0.0:
            s += w[i] * nu[i] * exp(w[i] * z)
    return s - k


def halfspace_z(nu, w, double k, double tol=1e-12):
    cdef double[::1] nv = np.ascontiguousarray(nu, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double lo = 0.0, hi = 1.0, mid
    cdef int it
    if _slope(nv, wv, k, 0.0) >= 0.0:
        return 0.0
    for it in range(2000):
        if _slope(nv, wv, k, hi) >= 0.0:
            break
        hi *= 2.0
        if hi > 1e300:
            raise ArithmeticError("half-space objective unbounded below")
    else:
        raise ArithmeticError("half-space objective unbounded below")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _slope(nv, wv, k, mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
