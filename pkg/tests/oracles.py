"""Independent reference computations shared by the test modules."""

import itertools
import math

import numpy as np


def brute_force_last_passage(W):
    """Max over all up-right paths from (1, 1) to (m, n) of the summed weights.

    Paths are enumerated as the positions of the m-1 right steps among the
    m+n-2 steps, so nothing is shared with the recursion being tested.
    """
    m, n = W.shape
    best = -math.inf
    steps = m + n - 2
    for rights in itertools.combinations(range(steps), m - 1):
        i = j = 0
        total = W[0, 0]
        rs = set(rights)
        for k in range(steps):
            if k in rs:
                i += 1
            else:
                j += 1
            total += W[i, j]
        best = max(best, total)
    return best


def brute_force_boundary(W, row, col):
    """Max over paths from the origin for the boundary model (exit then bulk)."""
    m, n = W.shape
    best = -math.inf
    for k in range(1, m + 1):
        # exit along the bottom row after k boundary cells, enter the bulk at (k, 1)
        base = sum(row[:k])
        best = max(best, base + brute_force_last_passage(W[k - 1 :, :]))
    for k in range(1, n + 1):
        base = sum(col[:k])
        best = max(best, base + brute_force_last_passage(W[:, k - 1 :]))
    return best


def grid_min(fun, lo, hi, points=1_000_001):
    z = np.linspace(lo, hi, points)
    return float(np.min(fun(z)))
