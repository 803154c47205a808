"""Compiled inner loops of the last-passage recursion."""

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def fill_last_passage(W, G):
    """G[i, j] = max(G[i-1, j], G[i, j-1]) + W[i-1, j-1] for i, j >= 1.

    Row 0 and column 0 of ``G`` hold the boundary values on entry.
    """
    m, n = W.shape
    for j in range(1, n + 1):
        for i in range(1, m + 1):
            up = G[i - 1, j]
            left = G[i, j - 1]
            G[i, j] = (up if up > left else left) + W[i - 1, j - 1]


@numba.njit(cache=True, nogil=True)
def advance_row(prev, w, out):
    """One row of the recursion: ``out[0]`` is the boundary value on entry."""
    for i in range(1, prev.shape[0]):
        a = out[i - 1]
        b = prev[i]
        out[i] = (a if a > b else b) + w[i - 1]


@numba.njit(cache=True, nogil=True)
def compensated_cumsum(x):
    """Prefix sums with Neumaier compensation; the result has a leading 0."""
    out = np.empty(x.shape[0] + 1)
    out[0] = 0.0
    s = 0.0
    c = 0.0
    for k in range(x.shape[0]):
        v = x[k]
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        out[k + 1] = s + c
    return out
