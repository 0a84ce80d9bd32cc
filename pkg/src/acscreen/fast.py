"""Fast exact U-statistics for the built-in kernels.

Each single-segment function returns exactly what
:func:`acscreen.kernels.u_statistic_naive` returns for the matching kernel, up
to rounding.  The ``*_table`` drivers take features transposed to ``(q, N)``
with rows already grouped by segment (``offsets`` delimits segment ``l`` as
``offsets[l]:offsets[l + 1]``) and fill a ``(q, s, m)`` array.  Every
(feature, segment) cell is written once, so results do not depend on the
number of threads.

Passing ``vstat=True`` to a driver returns V-statistics instead (the kernel
averaged over all ``n^k`` index tuples, repeats included), which are the
classic plug-in sample versions of the same components.
"""
import os

import numba
import numpy as np
from numba import njit, prange

if "NUMBA_THREADING_LAYER" not in os.environ:
    # an outdated TBB only produces a warning before numba falls back anyway
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

__all__ = [
    "u_kendall_fast",
    "u_sirs_fast",
    "u_dc_components_fast",
    "pearson_table",
    "kendall_table",
    "sirs_table",
    "dc_table",
]


@njit(inline="always")
def _acc(s, c, v):
    # Neumaier compensated add; the running value is s + c
    t = s + v
    if abs(s) >= abs(v):
        c += (s - t) + v
    else:
        c += (v - t) + s
    return t, c


@njit(cache=True)
def _concordant_pairs(x, y):
    """Count pairs with x_i < x_j and y_i < y_j (strict), by merge sort."""
    n = x.shape[0]
    # x ascending, ties in x by y descending so tied-x pairs never count
    o1 = np.argsort(-y, kind="mergesort")
    o2 = np.argsort(x[o1], kind="mergesort")
    buf = y[o1[o2]].copy()
    tmp = np.empty_like(buf)
    count = 0
    width = 1
    while width < n:
        lo = 0
        while lo < n:
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i = lo
            j = mid
            k = lo
            while i < mid and j < hi:
                if buf[i] < buf[j]:
                    tmp[k] = buf[i]
                    i += 1
                else:
                    count += i - lo
                    tmp[k] = buf[j]
                    j += 1
                k += 1
            while i < mid:
                tmp[k] = buf[i]
                i += 1
                k += 1
            while j < hi:
                count += mid - lo
                tmp[k] = buf[j]
                j += 1
                k += 1
            lo += 2 * width
        buf, tmp = tmp, buf
        width *= 2
    return count


@njit(cache=True)
def _kendall_1d(x, y, vstat=False):
    n = x.shape[0]
    # each concordant unordered pair has symmetrized kernel value 1/2;
    # repeated-index tuples contribute 0 to the V-statistic
    return _concordant_pairs(x, y) / (n * (n if vstat else n - 1.0))


@njit(cache=True)
def _sirs_1d(x, y, order, vstat=False):
    # order sorts y ascending; a tie group joins the prefix only after it passes
    n = x.shape[0]
    s = 0.0
    sc = 0.0
    q = 0.0
    qc = 0.0
    tot = 0.0
    totc = 0.0
    g0 = 0
    while g0 < n:
        yv = y[order[g0]]
        g1 = g0 + 1
        while g1 < n and y[order[g1]] == yv:
            g1 += 1
        S = s + sc
        d = S * S if vstat else S * S - (q + qc)
        tot, totc = _acc(tot, totc, (g1 - g0) * d)
        for k in range(g0, g1):
            v = x[order[k]]
            s, sc = _acc(s, sc, v)
            q, qc = _acc(q, qc, v * v)
        g0 = g1
    if vstat:
        return (tot + totc) / (n * n * float(n))
    return (tot + totc) / (n * (n - 1.0) * (n - 2.0))


@njit(cache=True)
def _dc_1d(x, y, out, vstat=False):
    n = x.shape[0]
    ry = np.zeros(n)
    rx = np.zeros(n)
    cxy = np.zeros(n)
    cyy = np.zeros(n)
    cxx = np.zeros(n)
    for i in range(n):
        for j in range(i + 1, n):
            dy = abs(y[i] - y[j])
            dx = abs(x[i] - x[j])
            ry[i] += dy
            ry[j] += dy
            rx[i] += dx
            rx[j] += dx
            v = dy * dx
            cxy[i] += v
            cxy[j] += v
            v = dy * dy
            cyy[i] += v
            cyy[j] += v
            v = dx * dx
            cxx[i] += v
            cxx[j] += v
    a = np.zeros(8)
    c = np.zeros(8)
    # the V-statistic keeps the i1 == i2 terms of the anchored triples
    keep = 0.0 if vstat else 1.0
    for i in range(n):
        a[0], c[0] = _acc(a[0], c[0], cxy[i])
        a[1], c[1] = _acc(a[1], c[1], ry[i])
        a[2], c[2] = _acc(a[2], c[2], rx[i])
        a[3], c[3] = _acc(a[3], c[3], ry[i] * rx[i] - keep * cxy[i])
        a[4], c[4] = _acc(a[4], c[4], cyy[i])
        a[5], c[5] = _acc(a[5], c[5], ry[i] * ry[i] - keep * cyy[i])
        a[6], c[6] = _acc(a[6], c[6], cxx[i])
        a[7], c[7] = _acc(a[7], c[7], rx[i] * rx[i] - keep * cxx[i])
    if vstat:
        pairs = n * float(n)
        triples = pairs * n
    else:
        pairs = n * (n - 1.0)
        triples = pairs * (n - 2.0)
    for h in range(8):
        d = triples if h == 3 or h == 5 or h == 7 else pairs
        out[h] = (a[h] + c[h]) / d


@njit(cache=True)
def _pearson_1d(x, y, out):
    n = x.shape[0]
    a = np.zeros(5)
    c = np.zeros(5)
    for i in range(n):
        a[0], c[0] = _acc(a[0], c[0], x[i] * y[i])
        a[1], c[1] = _acc(a[1], c[1], x[i])
        a[2], c[2] = _acc(a[2], c[2], y[i])
        a[3], c[3] = _acc(a[3], c[3], x[i] * x[i])
        a[4], c[4] = _acc(a[4], c[4], y[i] * y[i])
    for h in range(5):
        out[h] = (a[h] + c[h]) / n


@njit(cache=True, parallel=True)
def _pearson_table(Xt, y, offsets, vstat):
    q = Xt.shape[0]
    m = offsets.shape[0] - 1
    out = np.empty((q, 5, m))
    for j in prange(q):
        buf = np.empty(5)
        for l in range(m):
            lo, hi = offsets[l], offsets[l + 1]
            _pearson_1d(Xt[j, lo:hi], y[lo:hi], buf)
            out[j, :, l] = buf
    return out


@njit(cache=True, parallel=True)
def _kendall_table(Xt, y, offsets, vstat):
    q = Xt.shape[0]
    m = offsets.shape[0] - 1
    out = np.empty((q, 1, m))
    for j in prange(q):
        for l in range(m):
            lo, hi = offsets[l], offsets[l + 1]
            out[j, 0, l] = _kendall_1d(Xt[j, lo:hi], y[lo:hi], vstat)
    return out


@njit(cache=True)
def _segment_orders(y, offsets):
    order = np.empty(y.shape[0], dtype=np.int64)
    for l in range(offsets.shape[0] - 1):
        lo, hi = offsets[l], offsets[l + 1]
        order[lo:hi] = np.argsort(y[lo:hi], kind="mergesort")
    return order


@njit(cache=True, parallel=True)
def _sirs_table(Xt, y, offsets, order, vstat):
    q = Xt.shape[0]
    m = offsets.shape[0] - 1
    out = np.empty((q, 1, m))
    for j in prange(q):
        for l in range(m):
            lo, hi = offsets[l], offsets[l + 1]
            out[j, 0, l] = _sirs_1d(Xt[j, lo:hi], y[lo:hi], order[lo:hi], vstat)
    return out


@njit(cache=True, parallel=True)
def _dc_table(Xt, y, offsets, vstat):
    q = Xt.shape[0]
    m = offsets.shape[0] - 1
    out = np.empty((q, 8, m))
    for j in prange(q):
        buf = np.empty(8)
        for l in range(m):
            lo, hi = offsets[l], offsets[l + 1]
            _dc_1d(Xt[j, lo:hi], y[lo:hi], buf, vstat)
            out[j, :, l] = buf
    return out


def _prep(xs, ys, need):
    x = np.ascontiguousarray(xs, dtype=np.float64)
    y = np.ascontiguousarray(ys, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError("xs and ys must be 1-d arrays of equal length")
    if x.shape[0] < need:
        raise ValueError(f"need at least {need} observations, got {x.shape[0]}")
    return x, y


def u_kendall_fast(xs, ys) -> float:
    """Kendall concordance U-statistic in O(n log n)."""
    x, y = _prep(xs, ys, 2)
    return float(_kendall_1d(x, y))


def u_sirs_fast(xs, ys) -> float:
    """SIRS U-statistic in O(n log n) via prefix sums over y-order."""
    x, y = _prep(xs, ys, 3)
    return float(_sirs_1d(x, y, np.argsort(y, kind="mergesort")))


def u_dc_components_fast(xs, ys) -> np.ndarray:
    """The eight distance-correlation component U-statistics in O(n^2).

    Returns
    -------
    ndarray, shape (8,)
        Pair components at positions 0, 1, 2, 4, 6 and anchored triple
        components at positions 3, 5, 7.
    """
    x, y = _prep(xs, ys, 3)
    out = np.empty(8)
    _dc_1d(x, y, out)
    return out


def _ready(Xt, y, offsets):
    return (
        np.ascontiguousarray(Xt, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.float64),
        np.ascontiguousarray(offsets, dtype=np.int64),
    )


def pearson_table(Xt, y, offsets, vstat=False):
    # degree-1 U- and V-statistics coincide
    return _pearson_table(*_ready(Xt, y, offsets), bool(vstat))


def kendall_table(Xt, y, offsets, vstat=False):
    return _kendall_table(*_ready(Xt, y, offsets), bool(vstat))


def sirs_table(Xt, y, offsets, vstat=False):
    Xt, y, offsets = _ready(Xt, y, offsets)
    return _sirs_table(Xt, y, offsets, _segment_orders(y, offsets), bool(vstat))


def dc_table(Xt, y, offsets, vstat=False):
    return _dc_table(*_ready(Xt, y, offsets), bool(vstat))
