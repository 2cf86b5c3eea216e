# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops for ball sums.

Accumulation order is part of the contract: cells are visited in
row-major offset order and added sequentially left to right, which makes
the results bit-identical to the pure-numpy fallback (cumsum reductions)
and to the brute-force oracle.
"""

import numpy as np

from libc.math cimport fabs


def osc_sums(double[::1] f, long long[::1] centers, table):
    """Sum of |f - mean| over a ball around each center.

    Balls must lie fully inside the array (callers guarantee this via
    the containment-radius test), so runs are contiguous memory.
    """
    cdef long long[::1] run_off = table.run_off
    cdef long long[::1] run_len = table.run_len
    cdef long long count = table.count
    cdef Py_ssize_t n = centers.shape[0]
    cdef Py_ssize_t nruns = run_off.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, r, j
    cdef long long base
    cdef double s, mean, acc
    for i in range(n):
        s = 0.0
        for r in range(nruns):
            base = centers[i] + run_off[r]
            for j in range(run_len[r]):
                s = s + f[base + j]
        mean = s / count
        acc = 0.0
        for r in range(nruns):
            base = centers[i] + run_off[r]
            for j in range(run_len[r]):
                acc = acc + fabs(f[base + j] - mean)
        o[i] = acc
    return out


def abs_sums(double[::1] f, long long[::1] centers, table):
    """Sum of |f| over a ball around each center (balls fully inside)."""
    cdef long long[::1] run_off = table.run_off
    cdef long long[::1] run_len = table.run_len
    cdef Py_ssize_t n = centers.shape[0]
    cdef Py_ssize_t nruns = run_off.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, r, j
    cdef long long base
    cdef double acc
    for i in range(n):
        acc = 0.0
        for r in range(nruns):
            base = centers[i] + run_off[r]
            for j in range(run_len[r]):
                acc = acc + fabs(f[base + j])
        o[i] = acc
    return out


def masked_abs_sums(double[::1] f, unsigned char[::1] mask,
                    long long[:, ::1] anchors, table):
    """Sum of |f| over ball & mask around each anchor, clipped to bounds.

    anchors holds cell coordinates, shape (N, nd).  Cells outside the
    array are treated as absent; cells with mask == 0 are skipped.
    """
    cdef long long[:, ::1] run_fixed = table.run_fixed
    cdef long long[::1] run_lo = table.run_lo
    cdef long long[::1] run_hi = table.run_hi
    cdef long long[::1] shape = table.shape_arr
    cdef long long[::1] strides = table.strides_arr
    cdef Py_ssize_t nd = shape.shape[0]
    cdef Py_ssize_t n = anchors.shape[0]
    cdef Py_ssize_t nruns = run_lo.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, r, k
    cdef long long c, lo, hi, base, x, j, last_stride, last_n
    cdef double acc
    cdef bint ok
    last_stride = strides[nd - 1]
    last_n = shape[nd - 1]
    for i in range(n):
        acc = 0.0
        for r in range(nruns):
            base = 0
            ok = True
            for k in range(nd - 1):
                c = anchors[i, k] + run_fixed[r, k]
                if c < 0 or c >= shape[k]:
                    ok = False
                    break
                base = base + c * strides[k]
            if not ok:
                continue
            lo = anchors[i, nd - 1] + run_lo[r]
            hi = anchors[i, nd - 1] + run_hi[r]
            if lo < 0:
                lo = 0
            if hi > last_n - 1:
                hi = last_n - 1
            for x in range(lo, hi + 1):
                j = base + x * last_stride
                if mask[j]:
                    acc = acc + fabs(f[j])
        o[i] = acc
    return out
