# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled heatmap kernels. Same contract and operation order as ``_pykernels``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline Py_ssize_t _bin_index(double v, double lo, double width, Py_ssize_t bins,
                                   const double[::1] edges) nogil:
    cdef double pos = (v - lo) / width * bins
    cdef Py_ssize_t idx
    if pos < 0:
        idx = 0
    elif pos >= bins:
        idx = bins - 1
    else:
        idx = <Py_ssize_t>pos
    # the scaled position can round across an edge; settle against the edges
    if idx > 0 and v < edges[idx]:
        idx -= 1
    elif idx < bins - 1 and v >= edges[idx + 1]:
        idx += 1
    return idx


def bin_points(const double[::1] xs, const double[::1] ys, Py_ssize_t bins,
               double x_lo, double x_hi, double y_lo, double y_hi):
    cdef Py_ssize_t n = xs.shape[0], i
    cdef double x_width = x_hi - x_lo, y_width = y_hi - y_lo
    cdef const double[::1] x_edges = np.linspace(x_lo, x_hi, bins + 1)
    cdef const double[::1] y_edges = np.linspace(y_lo, y_hi, bins + 1)
    out = np.zeros((bins, bins), dtype=np.float64)
    cdef double[:, ::1] counts = out
    with nogil:
        for i in range(n):
            counts[_bin_index(ys[i], y_lo, y_width, bins, y_edges),
                   _bin_index(xs[i], x_lo, x_width, bins, x_edges)] += 1.0
    return out


cdef inline Py_ssize_t _mirror(Py_ssize_t p, Py_ssize_t n) nogil:
    cdef Py_ssize_t period = 2 * n
    cdef Py_ssize_t m = p % period
    if m < 0:
        m += period
    if m >= n:
        m = period - 1 - m
    return m


def convolve_rows(const double[:, ::1] arr, const double[::1] kernel):
    cdef Py_ssize_t rows = arr.shape[0], n = arr.shape[1]
    cdef Py_ssize_t width = kernel.shape[0], radius = (width - 1) // 2
    cdef Py_ssize_t r, i, k
    cdef double acc
    out = np.empty((rows, n), dtype=np.float64)
    cdef double[:, ::1] res = out
    idx_arr = np.empty(n + 2 * radius, dtype=np.intp)
    cdef Py_ssize_t[::1] idx = idx_arr
    for i in range(n + 2 * radius):
        idx[i] = _mirror(i - radius, n)
    with nogil:
        for r in range(rows):
            for i in range(n):
                acc = 0.0
                for k in range(width):
                    acc = acc + kernel[k] * arr[r, idx[i + k]]
                res[r, i] = acc
    return out
