"""numba-compiled kernels. Same contracts as ``numpy_impl``."""

import math
import os

import numpy as np
from numba import config, njit, prange

if "NUMBA_THREADING_LAYER" not in os.environ:
    # skip the TBB probe, it warns on older TBB installs
    config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]

_PERMS = np.array([[1, 2, 0], [2, 0, 1], [0, 1, 2]], dtype=np.int64)
_OFFDIAG = np.array([[0, 1], [1, 2], [2, 0]], dtype=np.int64)
_SIGNS = np.array(
    [[si, sj, sk] for si in (1.0, -1.0) for sj in (1.0, -1.0) for sk in (1.0, -1.0)]
)


@njit(cache=True)
def _arccot(v):
    t = math.atan(1.0 / v)
    if v < 0.0:
        return math.pi + t
    return t


@njit(cache=True)
def _tensor_at(px, py, pz, a, signs, perms, offdiag, out):
    p = (px, py, pz)
    d = np.empty(3)
    for c in range(8):
        for m in range(3):
            d[m] = a[m] - signs[c, m] * p[m]
        r = math.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
        for q in range(3):
            i = perms[q, 0]
            j = perms[q, 1]
            k = perms[q, 2]
            out[k, k] += _arccot(r * d[k] / (d[i] * d[j]))
    for m in range(3):
        out[m, m] /= 4.0 * math.pi

    e = np.empty(3)
    for q in range(3):
        i = offdiag[q, 0]
        k = offdiag[q, 1]
        j = 3 - i - k
        acc = 0.0
        for c in range(8):
            for m in range(3):
                e[m] = signs[c, m] * a[m] - p[m]
            g = e[j] + math.sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2])
            parity = signs[c, 0] * signs[c, 1] * signs[c, 2]
            if parity > 0:
                acc += math.log(g)
            else:
                acc -= math.log(g)
        val = -acc / (4.0 * math.pi)
        out[i, k] = val
        out[k, i] = val


@njit(parallel=True, cache=True)
def _demag_points(points, a, signs, perms, offdiag):
    n = points.shape[0]
    out = np.zeros((n, 3, 3))
    for s in prange(n):
        _tensor_at(points[s, 0], points[s, 1], points[s, 2], a, signs, perms, offdiag, out[s])
    return out


def demag_tensor_points(points, half_dims):
    p = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=np.float64)))
    a = np.ascontiguousarray(np.asarray(half_dims, dtype=np.float64))
    return _demag_points(p, a, _SIGNS, _PERMS, _OFFDIAG)


@njit(parallel=True, cache=True)
def _lorentzian_grid(centers, widths, weights, freqs):
    n_field, n_line = centers.shape
    n_freq = freqs.shape[0]
    out = np.zeros((n_field, n_freq))
    for h in prange(n_field):
        for b in range(n_line):
            c = centers[h, b]
            w = weights[h, b]
            if math.isnan(c) or math.isnan(w):
                continue
            hw = 0.5 * widths[h, b]
            for q in range(n_freq):
                x = (freqs[q] - c) / hw
                out[h, q] += w / (1.0 + x * x)
    return out


def lorentzian_grid(centers, widths, weights, freqs):
    return _lorentzian_grid(
        np.ascontiguousarray(centers, dtype=np.float64),
        np.ascontiguousarray(np.broadcast_to(np.asarray(widths, dtype=np.float64),
                                             np.shape(centers))),
        np.ascontiguousarray(weights, dtype=np.float64),
        np.ascontiguousarray(freqs, dtype=np.float64),
    )


@njit(cache=True)
def _column_peaks(y, x, threshold):
    n_row, n_col = y.shape
    cap = n_row * (n_col // 2 + 1)
    rows = np.empty(cap, dtype=np.int64)
    cols = np.empty(cap, dtype=np.int64)
    pos = np.empty(cap)
    height = np.empty(cap)
    count = 0
    for r in range(n_row):
        for c in range(1, n_col - 1):
            y1 = y[r, c]
            if not (y1 > y[r, c - 1] and y1 >= y[r, c + 1] and y1 > threshold):
                continue
            t0 = x[c - 1] - x[c]
            t2 = x[c + 1] - x[c]
            d0 = y[r, c - 1] - y1
            d2 = y[r, c + 1] - y1
            det = t0 * t2 * (t0 - t2)
            a = (d0 * t2 - d2 * t0) / det
            b = (t0 * t0 * d2 - t2 * t2 * d0) / det
            tv = 0.0
            yv = y1
            if a < 0.0:
                tv = -b / (2.0 * a)
                yv = y1 - b * b / (4.0 * a)
                if tv < t0:
                    tv = t0
                elif tv > t2:
                    tv = t2
            rows[count] = r
            cols[count] = c
            pos[count] = x[c] + tv
            height[count] = yv
            count += 1
    return rows[:count], cols[:count], pos[:count], height[:count]


def column_peaks(values, freqs, threshold):
    return _column_peaks(
        np.ascontiguousarray(values, dtype=np.float64),
        np.ascontiguousarray(freqs, dtype=np.float64),
        float(threshold),
    )
