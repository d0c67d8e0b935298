# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.  Must stay bit-identical to ``_pykernels``: same
summation order, no reassociation."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


def window_stats(const double[:, ::1] windows):
    """(sum of concavity deltas, number of strict local extrema) over (n, 3) windows."""
    cdef Py_ssize_t i, n = windows.shape[0]
    cdef double a, b, c, d, total = 0.0
    cdef long extrema = 0
    with nogil:
        for i in range(n):
            a = windows[i, 0]
            b = windows[i, 1]
            c = windows[i, 2]
            # half the summed rises to each neighbour; positive iff 2b < a + c
            d = 0.5 * ((a - b) + (c - b))
            if d > 0.0:
                total += d
            if (b > a and b > c) or (b < a and b < c):
                extrema += 1
    return total, extrema


def auc_halves(const double[::1] pos, const double[::1] neg):
    """2*(pairs with pos > neg) + (tied pairs); both inputs sorted ascending."""
    cdef Py_ssize_t i, lo = 0, hi = 0, npos = pos.shape[0], nneg = neg.shape[0]
    cdef long long total = 0
    cdef double x
    with nogil:
        for i in range(npos):
            x = pos[i]
            while lo < nneg and neg[lo] < x:
                lo += 1
            if hi < lo:
                hi = lo
            while hi < nneg and neg[hi] <= x:
                hi += 1
            total += 2 * lo + (hi - lo)
    return total


def flip_mean_stats(const double[::1] diffs, const unsigned char[:, ::1] flips):
    """|mean of sign-flipped paired differences| for every flip row."""
    cdef Py_ssize_t r, i, nrow = flips.shape[0], n = diffs.shape[0]
    cdef double acc
    out = np.empty(nrow, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for r in range(nrow):
            acc = 0.0
            for i in range(n):
                if flips[r, i]:
                    acc -= diffs[i]
                else:
                    acc += diffs[i]
            o[r] = fabs(acc) / n
    return out


cdef inline double _f1(double rn, double rd, double pn, double pd) nogil:
    cdef double r = rn / rd if rd > 0 else 0.0
    cdef double p = pn / pd if pd > 0 else 0.0
    if p + r > 0:
        return 2.0 * p * r / (p + r)
    return 0.0


def flip_f1_stats(const double[:, ::1] a, const double[:, ::1] b, const unsigned char[:, ::1] flips):
    """|mean F1 of side a - mean F1 of side b| after swapping flipped documents.

    ``a`` and ``b`` are (docs, metrics*4) arrays of recall numerator,
    recall denominator, precision numerator, precision denominator.
    """
    cdef Py_ssize_t r, i, k, nrow = flips.shape[0], n = a.shape[0], width = a.shape[1]
    cdef Py_ssize_t m = width // 4
    cdef double fa, fb
    out = np.empty(nrow, dtype=np.float64)
    cdef double[::1] o = out
    sa_arr = np.empty(width, dtype=np.float64)
    sb_arr = np.empty(width, dtype=np.float64)
    cdef double[::1] sa = sa_arr
    cdef double[::1] sb = sb_arr
    with nogil:
        for r in range(nrow):
            for k in range(width):
                sa[k] = 0.0
                sb[k] = 0.0
            for i in range(n):
                if flips[r, i]:
                    for k in range(width):
                        sa[k] += b[i, k]
                        sb[k] += a[i, k]
                else:
                    for k in range(width):
                        sa[k] += a[i, k]
                        sb[k] += b[i, k]
            fa = 0.0
            fb = 0.0
            for k in range(m):
                fa += _f1(sa[4 * k], sa[4 * k + 1], sa[4 * k + 2], sa[4 * k + 3])
                fb += _f1(sb[4 * k], sb[4 * k + 1], sb[4 * k + 2], sb[4 * k + 3])
            o[r] = fabs(fa / m - fb / m)
    return out
