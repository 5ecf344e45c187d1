# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: batched Gaussian product-kernel cdf/pdf, the per-sample
outer-product accumulation behind the product grid, and the cumulative
subtraction of the reference grid.

Signatures match :mod:`eigensens._pykernels`; every routine releases the GIL
so callers can fan out over threads.
"""
import numpy as np

from libc.math cimport erfc, exp
from libc.stdlib cimport malloc, free

cdef double INV_SQRT2 = 0.70710678118654752440
cdef double INV_SQRT2PI = 0.39894228040143267794


cdef inline double _phi(double z) noexcept nogil:
    return 0.5 * erfc(-z * INV_SQRT2)


def kde_cdf(const double[:, ::1] samples, const double[::1] bandwidth,
            const double[:, ::1] points):
    cdef Py_ssize_t n = samples.shape[0], d = samples.shape[1]
    cdef Py_ssize_t m = points.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double acc, prod
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] res = out
    with nogil:
        for j in range(m):
            acc = 0.0
            for i in range(n):
                prod = 1.0
                for k in range(d):
                    prod = prod * _phi((points[j, k] - samples[i, k]) / bandwidth[k])
                    if prod == 0.0:
                        break
                acc = acc + prod
            res[j] = acc / n
    return out


def kde_pdf(const double[:, ::1] samples, const double[::1] bandwidth,
            const double[:, ::1] points):
    cdef Py_ssize_t n = samples.shape[0], d = samples.shape[1]
    cdef Py_ssize_t m = points.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double acc, prod, z, norm = 1.0
    for k in range(d):
        norm = norm * INV_SQRT2PI / bandwidth[k]
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] res = out
    with nogil:
        for j in range(m):
            acc = 0.0
            for i in range(n):
                z = 0.0
                for k in range(d):
                    prod = (points[j, k] - samples[i, k]) / bandwidth[k]
                    z = z + prod * prod
                acc = acc + exp(-0.5 * z)
            res[j] = norm * acc / n
    return out


def product_accumulate(const double[:, :, ::1] increments, Py_ssize_t start, Py_ssize_t stop):
    """Sum over samples ``start:stop`` of the outer product of per-axis increments.

    ``increments`` has shape ``(d, n, B)``; the result is the flattened
    ``B**d`` tensor in lexicographic (C) order, unscaled.
    """
    cdef Py_ssize_t d = increments.shape[0], B = increments.shape[2]
    cdef Py_ssize_t total = 1, head, size, i, k, a, b, t
    cdef double v
    cdef double *tmp
    cdef double *nxt
    cdef double *swap
    for k in range(d):
        total *= B
    out = np.zeros(total, dtype=np.float64)
    cdef double[::1] acc = out
    head = total // B
    with nogil:
        tmp = <double *> malloc(head * sizeof(double))
        nxt = <double *> malloc(head * sizeof(double))
        for i in range(start, stop):
            # outer product over the leading d-1 axes
            tmp[0] = 1.0
            size = 1
            for k in range(d - 1):
                for a in range(size - 1, -1, -1):
                    v = tmp[a]
                    for b in range(B):
                        nxt[a * B + b] = v * increments[k, i, b]
                size = size * B
                swap = tmp
                tmp = nxt
                nxt = swap
            # fold in the last axis
            for a in range(head):
                v = tmp[a]
                if v == 0.0:
                    continue
                t = a * B
                for b in range(B):
                    acc[t + b] += v * increments[d - 1, i, b]
        free(tmp)
        free(nxt)
    return out


def reference_subtract(const double[::1] corner_cdf, Py_ssize_t B, Py_ssize_t d):
    """Cell masses from upper-corner cdf values by cumulative subtraction.

    Cells are visited in lexicographic order; each cell gets its corner cdf
    minus the mass already assigned to every dominated predecessor.
    """
    cdef Py_ssize_t total = corner_cdf.shape[0], c, k, j, idx
    cdef double s
    cdef Py_ssize_t *digits = NULL
    cdef Py_ssize_t *odo = NULL
    cdef Py_ssize_t *stride = NULL
    out = np.zeros(total, dtype=np.float64)
    cdef double[::1] prob = out
    with nogil:
        digits = <Py_ssize_t *> malloc(d * sizeof(Py_ssize_t))
        odo = <Py_ssize_t *> malloc(d * sizeof(Py_ssize_t))
        stride = <Py_ssize_t *> malloc(d * sizeof(Py_ssize_t))
        stride[d - 1] = 1
        for k in range(d - 2, -1, -1):
            stride[k] = stride[k + 1] * B
        for k in range(d):
            digits[k] = 0
        for c in range(total):
            # walk the dominated box [0, digits] with an odometer
            for k in range(d):
                odo[k] = 0
            s = 0.0
            while True:
                idx = 0
                for k in range(d):
                    idx = idx + odo[k] * stride[k]
                if idx != c:
                    s = s + prob[idx]
                j = d - 1
                while j >= 0:
                    if odo[j] < digits[j]:
                        odo[j] += 1
                        break
                    odo[j] = 0
                    j -= 1
                if j < 0:
                    break
            prob[c] = corner_cdf[c] - s
            # advance the lexicographic index of the current cell
            j = d - 1
            while j >= 0:
                digits[j] += 1
                if digits[j] < B:
                    break
                digits[j] = 0
                j -= 1
        free(digits)
        free(odo)
        free(stride)
    return out
