"""Pure-numpy implementation of the banded kernel kernels.

Mirrors ``_core.pyx`` exactly; used when the compiled extension is absent or
when ``LPFRONTIER_PURE_PYTHON`` is set.
"""

import numpy as np

_CHUNK = 1 << 20


def _windows(xs, centers, h):
    lo = np.searchsorted(centers, xs - h, side="right")
    hi = np.searchsorted(centers, xs + h, side="left")
    return lo, hi


def _horner(coeffs, t):
    # coeffs: (n_orders, deg+1) increasing powers; t: 1-d
    out = np.empty((coeffs.shape[0], t.shape[0]))
    for m in range(coeffs.shape[0]):
        p = np.full(t.shape[0], coeffs[m, -1])
        for k in range(coeffs.shape[1] - 2, -1, -1):
            p = p * t + coeffs[m, k]
        out[m] = p
    # kernel values are nonnegative; clear rounding residue near |t| = 1
    np.maximum(out[0], 0.0, out=out[0])
    return out


def _pairs(lo, hi):
    """Flattened (row, col) pairs for ragged windows [lo_i, hi_i)."""
    counts = np.maximum(hi - lo, 0)
    rows = np.repeat(np.arange(lo.shape[0]), counts)
    starts = np.repeat(lo - np.concatenate(([0], np.cumsum(counts)[:-1])), counts)
    cols = np.arange(rows.shape[0]) + starts
    return counts, rows, cols


def window_sums(xs, centers, alpha, h, coeffs):
    """``out[i, m] = sum_j alpha_j * K^(m)((xs_i - c_j)/h)`` over ``|xs_i - c_j| < h``."""
    xs = np.ascontiguousarray(xs, dtype=float)
    centers = np.ascontiguousarray(centers, dtype=float)
    alpha = np.ascontiguousarray(alpha, dtype=float)
    coeffs = np.ascontiguousarray(coeffs, dtype=float)
    out = np.zeros((xs.shape[0], coeffs.shape[0]))
    if xs.shape[0] == 0 or centers.shape[0] == 0:
        return out
    lo, hi = _windows(xs, centers, h)
    counts = np.maximum(hi - lo, 0)
    # chunk over evaluation points so the pair arrays stay bounded
    start = 0
    cum = np.cumsum(counts)
    while start < xs.shape[0]:
        base = cum[start - 1] if start else 0
        stop = int(np.searchsorted(cum, base + _CHUNK, side="right"))
        stop = max(stop, start + 1)
        sl = slice(start, stop)
        _, rows, cols = _pairs(lo[sl], hi[sl])
        if rows.shape[0]:
            t = (xs[sl][rows] - centers[cols]) / h
            vals = _horner(coeffs, t) * alpha[cols]
            for m in range(coeffs.shape[0]):
                out[sl, m] = _segment_sums(vals[m], rows, stop - start)
        start = stop
    return out


def _segment_sums(vals, rows, n):
    # bincount accumulates in input order, matching the compiled loop
    return np.bincount(rows, weights=vals, minlength=n)


def band_matrix(rows_x, centers, h, coeffs):
    """CSR pieces of ``K^(m)((x_r - c_j)/h)`` restricted to ``|x_r - c_j| < h``.

    Returns ``(indptr, indices, data)`` with ``data`` of shape ``(nnz, n_orders)``.
    """
    rows_x = np.ascontiguousarray(rows_x, dtype=float)
    centers = np.ascontiguousarray(centers, dtype=float)
    coeffs = np.ascontiguousarray(coeffs, dtype=float)
    lo, hi = _windows(rows_x, centers, h)
    counts, rows, cols = _pairs(lo, hi)
    indptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
    t = (rows_x[rows] - centers[cols]) / h
    data = _horner(coeffs, t).T.copy() if rows.shape[0] else np.zeros((0, coeffs.shape[0]))
    return indptr, cols.astype(np.int64), data
