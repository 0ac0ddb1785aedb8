# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled banded kernel sums and matrix assembly.

Same contract as ``_core_py``: centers are sorted ascending and only pairs
with ``|x - c| < h`` contribute.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline Py_ssize_t _lower(const double[::1] c, double v) nogil:
    # first index with c[i] > v
    cdef Py_ssize_t lo = 0, hi = c.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if c[mid] <= v:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline Py_ssize_t _upper(const double[::1] c, double v) nogil:
    # first index with c[i] >= v
    cdef Py_ssize_t lo = 0, hi = c.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if c[mid] < v:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline double _horner(const double[:, ::1] coeffs, Py_ssize_t m, double t) nogil:
    cdef Py_ssize_t k = coeffs.shape[1] - 1
    cdef double p = coeffs[m, k]
    while k > 0:
        k -= 1
        p = p * t + coeffs[m, k]
    # kernel values are nonnegative; clear rounding residue near |t| = 1
    if m == 0 and p < 0.0:
        return 0.0
    return p


def window_sums(xs, centers, alpha, double h, coeffs):
    cdef const double[::1] xv = np.ascontiguousarray(xs, dtype=np.float64)
    cdef const double[::1] cv = np.ascontiguousarray(centers, dtype=np.float64)
    cdef const double[::1] av = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef const double[:, ::1] co = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], n_ord = co.shape[0]
    out = np.zeros((n, n_ord))
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i, j, m, lo, hi
    cdef double x, t, a
    if cv.shape[0] == 0:
        return out
    with nogil:
        for i in range(n):
            x = xv[i]
            lo = _lower(cv, x - h)
            hi = _upper(cv, x + h)
            for j in range(lo, hi):
                t = (x - cv[j]) / h
                a = av[j]
                for m in range(n_ord):
                    ov[i, m] += _horner(co, m, t) * a
    return out


def band_matrix(rows_x, centers, double h, coeffs):
    cdef const double[::1] xv = np.ascontiguousarray(rows_x, dtype=np.float64)
    cdef const double[::1] cv = np.ascontiguousarray(centers, dtype=np.float64)
    cdef const double[:, ::1] co = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], n_ord = co.shape[0]
    cdef Py_ssize_t i, j, m, k, lo, hi, nnz = 0
    indptr = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] ip = indptr
    with nogil:
        for i in range(n):
            lo = _lower(cv, xv[i] - h)
            hi = _upper(cv, xv[i] + h)
            if hi > lo:
                nnz += hi - lo
            ip[i + 1] = nnz
    indices = np.empty(nnz, dtype=np.int64)
    data = np.empty((nnz, n_ord))
    cdef cnp.int64_t[::1] iv = indices
    cdef double[:, ::1] dv = data
    cdef double t
    k = 0
    with nogil:
        for i in range(n):
            lo = _lower(cv, xv[i] - h)
            hi = _upper(cv, xv[i] + h)
            for j in range(lo, hi):
                t = (xv[i] - cv[j]) / h
                iv[k] = j
                for m in range(n_ord):
                    dv[k, m] = _horner(co, m, t)
                k += 1
    return indptr, indices, data
