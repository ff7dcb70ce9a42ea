"""Brute-force references, independent of the fast solvers they check."""
from itertools import combinations

import numpy as np


def exhaustive_l0(values, l, weights=None):
    """Enumerate every split of ``values`` into at most ``l`` contiguous runs.

    Returns ``(sse, boundaries)`` of the best split. Exponential in
    ``len(values)``; meant for m up to about 20.
    """
    x = np.asarray(values, dtype=float)
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    m = x.size
    if not 1 <= l <= m:
        raise ValueError(f"l must be in [1, {m}]")
    best = (np.inf, None)
    for n_cuts in range(l):
        for cuts in combinations(range(1, m), n_cuts):
            bounds = (0, *cuts, m)
            sse = 0.0
            for lo, hi in zip(bounds[:-1], bounds[1:]):
                seg, ws = x[lo:hi], w[lo:hi]
                mu = (ws @ seg) / ws.sum()
                sse += float(ws @ (seg - mu) ** 2)
            if sse < best[0]:
                best = (sse, np.array(bounds))
    return best


def dense_refit(N, target, support):
    """Normal-equation solve on the selected columns, scattered back to length m."""
    cols = N[:, support]
    coef = np.linalg.solve(cols.T @ cols, cols.T @ target)
    alpha = np.zeros(N.shape[1])
    alpha[support] = coef
    return alpha
