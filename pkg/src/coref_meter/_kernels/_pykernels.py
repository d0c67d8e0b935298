"""Pure-Python versions of the compiled kernels.

Same loops, same summation order, so results match the extension bit for bit.
"""

import numpy as np


def window_stats(windows):
    total = 0.0
    extrema = 0
    for a, b, c in np.asarray(windows, dtype=np.float64).tolist():
        d = 0.5 * ((a - b) + (c - b))
        if d > 0.0:
            total += d
        if (b > a and b > c) or (b < a and b < c):
            extrema += 1
    return total, extrema


def auc_halves(pos, neg):
    pos = np.asarray(pos, dtype=np.float64).tolist()
    neg = np.asarray(neg, dtype=np.float64).tolist()
    lo = hi = 0
    nneg = len(neg)
    total = 0
    for x in pos:
        while lo < nneg and neg[lo] < x:
            lo += 1
        if hi < lo:
            hi = lo
        while hi < nneg and neg[hi] <= x:
            hi += 1
        total += 2 * lo + (hi - lo)
    return total


def flip_mean_stats(diffs, flips):
    d = np.asarray(diffs, dtype=np.float64).tolist()
    n = len(d)
    out = np.empty(len(flips), dtype=np.float64)
    for r, row in enumerate(np.asarray(flips).tolist()):
        acc = 0.0
        for s, x in zip(row, d):
            if s:
                acc -= x
            else:
                acc += x
        out[r] = abs(acc) / n
    return out


def _f1(rn, rd, pn, pd):
    r = rn / rd if rd > 0 else 0.0
    p = pn / pd if pd > 0 else 0.0
    if p + r > 0:
        return 2.0 * p * r / (p + r)
    return 0.0


def flip_f1_stats(a, b, flips):
    a = np.asarray(a, dtype=np.float64).tolist()
    b = np.asarray(b, dtype=np.float64).tolist()
    width = len(a[0]) if a else 0
    m = width // 4
    out = np.empty(len(flips), dtype=np.float64)
    for r, row in enumerate(np.asarray(flips).tolist()):
        sa = [0.0] * width
        sb = [0.0] * width
        for s, ai, bi in zip(row, a, b):
            if s:
                ai, bi = bi, ai
            for k in range(width):
                sa[k] += ai[k]
                sb[k] += bi[k]
        fa = 0.0
        fb = 0.0
        for k in range(m):
            fa += _f1(*sa[4 * k : 4 * k + 4])
            fb += _f1(*sb[4 * k : 4 * k + 4])
        out[r] = abs(fa / m - fb / m)
    return out
