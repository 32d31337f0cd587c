# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for evaluating Hermite series at many points."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()


def hermite_series_eval(const long[:, ::1] alphas, const double[::1] coeffs,
                        const double[:, ::1] points):
    """Evaluate sum_k coeffs[k] * prod_i He_{alphas[k, i]}(points[n, i]).

    He_n are the probabilists' Hermite polynomials. The Gaussian factor is
    not applied.
    """
    cdef Py_ssize_t K = alphas.shape[0]
    cdef Py_ssize_t d = alphas.shape[1]
    cdef Py_ssize_t N = points.shape[0]
    if points.shape[1] != d:
        raise ValueError("points and alphas disagree on dimension")
    if coeffs.shape[0] != K:
        raise ValueError("one coefficient per multi-index required")

    cdef long maxdeg = 0
    cdef Py_ssize_t k, i, n, j
    for k in range(K):
        for i in range(d):
            if alphas[k, i] > maxdeg:
                maxdeg = alphas[k, i]
            if alphas[k, i] < 0:
                raise ValueError("negative multi-index entry")

    out = np.zeros(N, dtype=np.float64)
    cdef double[::1] res = out
    cdef Py_ssize_t stride = maxdeg + 1
    cdef double *table = <double *> malloc(d * stride * sizeof(double))
    if table == NULL:
        raise MemoryError()
    cdef double x, acc, term
    try:
        with nogil:
            for n in range(N):
                for i in range(d):
                    x = points[n, i]
                    table[i * stride] = 1.0
                    if maxdeg >= 1:
                        table[i * stride + 1] = x
                    for j in range(1, maxdeg):
                        table[i * stride + j + 1] = (x * table[i * stride + j]
                                                     - j * table[i * stride + j - 1])
                acc = 0.0
                for k in range(K):
                    term = coeffs[k]
                    for i in range(d):
                        term = term * table[i * stride + alphas[k, i]]
                    acc = acc + term
                res[n] = acc
    finally:
        free(table)
    return out
