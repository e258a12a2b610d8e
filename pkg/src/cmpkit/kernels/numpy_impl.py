"""Vectorised numpy kernels. Reference path and fallback for numba."""

import numpy as np

_PERMS = ((1, 2, 0), (2, 0, 1), (0, 1, 2))  # (i, j, k) cyclic, k = 0, 1, 2
_OFFDIAG = ((0, 1), (1, 2), (2, 0))
_SIGNS = np.array(
    [[si, sj, sk] for si in (1.0, -1.0) for sj in (1.0, -1.0) for sk in (1.0, -1.0)]
)


def demag_tensor_points(points, half_dims):
    """Pointwise first-order demagnetizing tensor of a rectangular prism.

    ``points`` has shape (n, 3), ``half_dims`` shape (3,). Returns (n, 3, 3).
    No domain check is done here.
    """
    p = np.atleast_2d(np.asarray(points, dtype=np.float64))
    a = np.asarray(half_dims, dtype=np.float64)
    n = p.shape[0]
    out = np.zeros((n, 3, 3))

    # distances from the point to the eight corners, per axis: (8, n, 3)
    d = a[None, None, :] - _SIGNS[:, None, :] * p[None, :, :]
    r = np.sqrt(np.sum(d * d, axis=2))  # (8, n)

    for i, j, k in _PERMS:
        # arccot(f) with f > 0 inside the prism
        f = r * d[:, :, k] / (d[:, :, i] * d[:, :, j])
        out[:, k, k] = np.sum(_arccot(f), axis=0) / (4.0 * np.pi)

    for i, k in _OFFDIAG:
        j = 3 - i - k
        # G(r | s_i a_i, s_j a_j, s_k a_k) = (s_j a_j - x_j) + |s*a - x|
        e = _SIGNS[:, None, :] * a[None, None, :] - p[None, :, :]
        g = e[:, :, j] + np.sqrt(np.sum(e * e, axis=2))
        parity = _SIGNS[:, i] * _SIGNS[:, j] * _SIGNS[:, k]
        log_g = np.log(g)
        val = -(np.sum(log_g[parity > 0], axis=0) - np.sum(log_g[parity < 0], axis=0))
        val /= 4.0 * np.pi
        out[:, i, k] = val
        out[:, k, i] = val
    return out


def _arccot(v):
    # branch kept in (0, pi)
    t = np.arctan(1.0 / v)
    return np.where(v < 0, np.pi + t, t)


def lorentzian_grid(centers, widths, weights, freqs):
    """Sum of unit-peak Lorentzians on a (field x frequency) grid.

    ``centers``, ``widths`` (full width at half maximum) and ``weights`` are
    (n_field, n_line). NaN centers contribute nothing.
    """
    c = np.asarray(centers, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    hw = 0.5 * np.broadcast_to(np.asarray(widths, dtype=np.float64), c.shape)
    f = np.asarray(freqs, dtype=np.float64)
    x = (f[None, None, :] - c[:, :, None]) / hw[:, :, None]
    lines = w[:, :, None] / (1.0 + x * x)
    lines = np.where(np.isnan(lines), 0.0, lines)
    return lines.sum(axis=1)


def column_peaks(values, freqs, threshold):
    """Local maxima above ``threshold`` in each row of ``values``.

    Returns ``(row_index, col_index, freq, height)`` arrays. Positions are refined by
    the vertex of the parabola through the peak sample and its neighbours.
    """
    y = np.asarray(values, dtype=np.float64)
    x = np.asarray(freqs, dtype=np.float64)
    left, mid, right = y[:, :-2], y[:, 1:-1], y[:, 2:]
    mask = (mid > left) & (mid >= right) & (mid > threshold)
    rows, cols = np.nonzero(mask)
    cols = cols + 1

    t0 = x[cols - 1] - x[cols]
    t2 = x[cols + 1] - x[cols]
    y1 = y[rows, cols]
    d0 = y[rows, cols - 1] - y1
    d2 = y[rows, cols + 1] - y1
    det = t0 * t2 * (t0 - t2)
    a = (d0 * t2 - d2 * t0) / det
    b = (t0 * t0 * d2 - t2 * t2 * d0) / det
    ok = a < 0
    safe_a = np.where(ok, a, -1.0)
    tv = np.where(ok, -b / (2.0 * safe_a), 0.0)
    tv = np.clip(tv, t0, t2)
    yv = np.where(ok, y1 - b * b / (4.0 * safe_a), y1)
    return rows.astype(np.int64), cols.astype(np.int64), x[cols] + tv, yv
