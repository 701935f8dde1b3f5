"""Numpy implementations of the heatmap kernels.

Used when the compiled ``_ckernels`` module is unavailable, and as the
reference the compiled module is checked against.
"""
import numpy as np


def _bin_index(values, lo, hi, bins):
    pos = (values - lo) / (hi - lo) * bins
    idx = np.clip(pos, 0, bins - 1).astype(np.intp)
    # the scaled position can round across an edge; settle against the edges
    edges = np.linspace(lo, hi, bins + 1)
    idx -= (idx > 0) & (values < edges[idx])
    idx += (idx < bins - 1) & (values >= edges[np.minimum(idx + 1, bins)])
    return idx


def bin_points(xs, ys, bins, x_lo, x_hi, y_lo, y_hi):
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    cols = _bin_index(xs, x_lo, x_hi, bins)
    rows = _bin_index(ys, y_lo, y_hi, bins)
    flat = np.bincount(rows * bins + cols, minlength=bins * bins)
    return flat.reshape(bins, bins).astype(np.float64)


def mirror_indices(n, radius):
    """Half-sample symmetric extension (``d c b a | a b c d | d c b a``) of length n."""
    p = np.arange(-radius, n + radius)
    m = np.mod(p, 2 * n)
    return np.where(m >= n, 2 * n - 1 - m, m)


def convolve_rows(arr, kernel):
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    kernel = np.ascontiguousarray(kernel, dtype=np.float64)
    n = arr.shape[1]
    radius = (kernel.shape[0] - 1) // 2
    padded = arr[:, mirror_indices(n, radius)]
    out = np.zeros_like(arr)
    for k in range(kernel.shape[0]):
        out += kernel[k] * padded[:, k:k + n]
    return out
