"""Sparse least-squares solvers over the step basis.

The penalized objective throughout is

    J(alpha) = ||target - N alpha||^2 + lambda1 * ||alpha||_1 - lambda2 * ||alpha||^2

with no 1/2 on the data term. The exact coordinate minimizer of ``J`` is

    alpha_k = S(rho_k, lambda1 / 2) / (||c_k||^2 - lambda2)

where ``rho_k = c_k . (target - N alpha) + ||c_k||^2 alpha_k``. Written in the
usual "shrink the normalized coordinate" form the threshold is
``lambda1 / (2 (||c_k||^2 - lambda2))``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import SparseCoefficients, StepBasis

logger = logging.getLogger(__name__)

#: relative margin required between 2*lambda2 and the smallest column norm
LAMBDA2_MARGIN = 1e-6


class DivergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-7
    max_sweeps: int = 10000
    lambda1: float = 0.0
    lambda2: float = 0.0

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if not self.lambda1 >= 0:
            raise ValueError("lambda1 must be >= 0")
        if not self.lambda2 >= 0:
            raise ValueError("lambda2 must be >= 0")


@dataclass(frozen=True)
class SolveTrace:
    sweeps_run: int
    final_max_delta: float
    converged: bool


@dataclass(frozen=True)
class L0Solution:
    """Optimal contiguous partition: segment ``t`` is ``values[boundaries[t]:boundaries[t+1]]``."""

    boundaries: np.ndarray
    levels: np.ndarray
    sse: float

    def fitted(self) -> np.ndarray:
        return np.repeat(self.levels, np.diff(self.boundaries))


def soft_threshold(x, a):
    """``sign(x) * max(|x| - a, 0)``; works on scalars and arrays."""
    if np.any(np.asarray(a) < 0):
        raise ValueError("threshold must be >= 0")
    out = np.sign(x) * np.maximum(np.abs(x) - a, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def objective(b: StepBasis, target, alpha, lambda1=0.0, lambda2=0.0) -> float:
    alpha = np.asarray(alpha, dtype=float)
    r = np.asarray(target, dtype=float) - np.cumsum(b.diffs * alpha)
    return float(r @ r + lambda1 * np.abs(alpha).sum() - lambda2 * (alpha @ alpha))


def shrinkage_thresholds(b: StepBasis, lambda1: float, lambda2: float = 0.0) -> np.ndarray:
    """Per-column dead-zone half-width on the normalized coordinate scale.

    Structurally zero columns get ``inf``.
    """
    colsq = b.column_sq_norms()
    with np.errstate(divide="ignore"):
        return np.where(colsq > 0, lambda1 / (2.0 * (colsq - lambda2)), np.inf)


def lambda_max(b: StepBasis, target) -> float:
    """Smallest ``lambda1`` for which ``alpha = 0`` is optimal (``lambda2 = 0``)."""
    target = np.asarray(target, dtype=float)
    suffix = np.cumsum(target[::-1])[::-1]
    return float(2.0 * np.max(np.abs(b.diffs * suffix)))


@njit(cache=True)
def _cd_kernel(d, colsq, target, alpha, lam1, lam2, tol, max_sweeps):
    m = d.shape[0]
    half = 0.5 * lam1
    r = np.empty(m)
    suffix = np.empty(m)
    max_delta = np.inf
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        acc = 0.0
        for i in range(m):
            acc += d[i] * alpha[i]
            r[i] = target[i] - acc
        acc = 0.0
        for i in range(m - 1, -1, -1):
            acc += r[i]
            suffix[i] = acc
        # Every update at j < k shifts r[i] for all i >= k by the same amount.
        shift = 0.0
        max_delta = 0.0
        for k in range(m):
            if d[k] == 0.0:
                continue
            rho = d[k] * (suffix[k] - (m - k) * shift) + colsq[k] * alpha[k]
            if rho > half:
                new = (rho - half) / (colsq[k] - lam2)
            elif rho < -half:
                new = (rho + half) / (colsq[k] - lam2)
            else:
                new = 0.0
            delta = new - alpha[k]
            if delta != 0.0:
                if not np.isfinite(new):
                    return sweeps, np.inf, False
                alpha[k] = new
                shift += d[k] * delta
                if abs(delta) > max_delta:
                    max_delta = abs(delta)
        if max_delta <= tol:
            return sweeps, max_delta, True
    return sweeps, max_delta, False


def _run_cd(b: StepBasis, target, cfg: SolverConfig, alpha0, lambda2: float):
    target = np.ascontiguousarray(target, dtype=float)
    if target.shape != (b.m,):
        raise ValueError(f"target has length {target.size}, basis has {b.m} columns")
    if alpha0 is None:
        alpha = np.ones(b.m)
    else:
        alpha = np.array(alpha0, dtype=float)
        if alpha.shape != (b.m,):
            raise ValueError(f"alpha0 has length {alpha.size}, basis has {b.m} columns")
    d = np.ascontiguousarray(b.diffs, dtype=float)
    alpha[d == 0.0] = 0.0
    sweeps, delta, converged = _cd_kernel(
        d, b.column_sq_norms(), target, alpha,
        float(cfg.lambda1), float(lambda2), float(cfg.tolerance), int(cfg.max_sweeps),
    )
    if not np.all(np.isfinite(alpha)) or not np.isfinite(delta):
        raise DivergenceError("divergence")
    if not converged:
        logger.warning("coordinate descent stopped after %d sweeps (max delta %.3g)", sweeps, delta)
    coef = SparseCoefficients(alpha=alpha, lambda1=cfg.lambda1, lambda2=lambda2, iterations=sweeps)
    return coef, SolveTrace(sweeps_run=sweeps, final_max_delta=float(delta), converged=converged)


def lasso_cd(b: StepBasis, target, cfg: SolverConfig = SolverConfig(), alpha0=None):
    """Cyclic coordinate descent for the L1-penalized step-basis fit.

    ``alpha0`` defaults to all ones, which reconstructs ``base_values`` exactly.
    ``cfg.lambda2`` is ignored here; see :func:`lasso_neg_l2_cd`.
    """
    return _run_cd(b, target, cfg, alpha0, 0.0)


def check_lambda2(b: StepBasis, lambda2: float) -> None:
    colsq = b.column_sq_norms()
    colsq = colsq[colsq > 0]
    if colsq.size and 2.0 * lambda2 > (1.0 - LAMBDA2_MARGIN) * colsq.min():
        raise ValueError(
            "lambda2 too large: denominator non-positive "
            f"(2*lambda2 = {2 * lambda2:.6g}, smallest squared column norm = {colsq.min():.6g})"
        )


def lasso_neg_l2_cd(b: StepBasis, target, cfg: SolverConfig, alpha0=None):
    """Coordinate descent with an extra ``-lambda2 * ||alpha||^2`` term.

    The negative quadratic widens every dead zone, so more coordinates hit
    zero for the same ``lambda1``. Requires ``2 * lambda2`` to stay below
    every nonzero squared column norm.
    """
    check_lambda2(b, cfg.lambda2)
    return _run_cd(b, target, cfg, alpha0, cfg.lambda2)


def _segment_means(target, starts, weights=None):
    m = len(target)
    bounds = np.append(starts, m)
    if weights is None:
        sums = np.add.reduceat(target, starts)
        return sums / np.diff(bounds)
    return np.add.reduceat(weights * target, starts) / np.add.reduceat(weights, starts)


def refit_levels(target, support, weights=None) -> np.ndarray:
    """Least-squares fitted vector for a given support.

    Rows before the first support index are fixed at 0; every other run
    ``[h_t, h_{t+1})`` takes the (weighted) mean of ``target`` over the run.
    """
    target = np.asarray(target, dtype=float)
    support = np.asarray(support, dtype=int)
    fitted = np.zeros_like(target)
    if support.size:
        levels = _segment_means(target, support, weights)
        fitted[support[0]:] = np.repeat(levels, np.diff(np.append(support, target.size)))
    return fitted


def post_ls_refit(b: StepBasis, target, support, weights=None) -> SparseCoefficients:
    """Unpenalized least squares restricted to ``support``, in O(m).

    The fitted vector is constant on each run between consecutive support
    indices, so the optimum sets each run to its mean; coefficients follow
    from the level jumps divided by the column step heights.
    """
    target = np.asarray(target, dtype=float)
    support = np.asarray(support, dtype=int)
    if target.shape != (b.m,):
        raise ValueError(f"target has length {target.size}, basis has {b.m} columns")
    if support.size == 0:
        raise ValueError("support must be non-empty")
    if support.min() < 0 or support.max() >= b.m:
        raise ValueError("support index out of range")
    if np.any(np.diff(support) <= 0):
        raise ValueError("support must be strictly ascending")
    if np.any(b.diffs[support] == 0):
        raise ValueError("singular selected system: structurally zero column in support")
    levels = _segment_means(target, support, weights)
    jumps = np.diff(levels, prepend=0.0)
    alpha = np.zeros(b.m)
    alpha[support] = jumps / b.diffs[support]
    return SparseCoefficients(alpha=alpha)


@njit(cache=True)
def _seg_cost(w1, s1, s2, j, i):
    wt = w1[i] - w1[j]
    sx = s1[i] - s1[j]
    c = s2[i] - s2[j] - sx * sx / wt
    return c if c > 0.0 else 0.0


@njit(cache=True)
def _l0_kernel(w1, s1, s2, n_seg):
    # Layer k holds the best cost of splitting the first i values into k runs.
    # The optimal last split point is monotone in i for squared-error costs,
    # so each layer is filled by divide and conquer in O(m log m).
    m = w1.shape[0] - 1
    prev = np.full(m + 1, np.inf)
    prev[0] = 0.0
    cur = np.empty(m + 1)
    back = np.zeros((n_seg + 1, m + 1), dtype=np.int64)
    stack = np.empty((2 * m + 8, 4), dtype=np.int64)
    for k in range(1, n_seg + 1):
        cur[:] = np.inf
        top = 0
        stack[0, 0] = k
        stack[0, 1] = m
        stack[0, 2] = k - 1
        stack[0, 3] = m - 1
        top = 1
        while top > 0:
            top -= 1
            lo = stack[top, 0]
            hi = stack[top, 1]
            olo = stack[top, 2]
            ohi = stack[top, 3]
            if lo > hi:
                continue
            mid = (lo + hi) // 2
            bv = np.inf
            bj = olo
            for j in range(olo, min(mid - 1, ohi) + 1):
                if prev[j] == np.inf:
                    continue
                v = prev[j] + _seg_cost(w1, s1, s2, j, mid)
                if v < bv:
                    bv = v
                    bj = j
            cur[mid] = bv
            back[k, mid] = bj
            stack[top, 0] = lo
            stack[top, 1] = mid - 1
            stack[top, 2] = olo
            stack[top, 3] = bj
            stack[top + 1, 0] = mid + 1
            stack[top + 1, 1] = hi
            stack[top + 1, 2] = bj
            stack[top + 1, 3] = ohi
            top += 2
        prev[:] = cur
    return cur[m], back


def segment_sse(values, boundaries, weights=None) -> tuple[np.ndarray, float]:
    """Two-pass per-segment means and the total (weighted) squared error."""
    values = np.asarray(values, dtype=float)
    w = np.ones_like(values) if weights is None else np.asarray(weights, dtype=float)
    levels = np.empty(len(boundaries) - 1)
    sse = 0.0
    for t, (lo, hi) in enumerate(zip(boundaries[:-1], boundaries[1:])):
        seg, ws = values[lo:hi], w[lo:hi]
        levels[t] = (ws @ seg) / ws.sum()
        sse += float(ws @ (seg - levels[t]) ** 2)
    return levels, sse


def solve_l0_dp(values, l: int, weights=None) -> L0Solution:
    """Best quantizer with at most ``l`` levels for ascending 1-D ``values``.

    Optimal levels of sorted 1-D data occupy contiguous runs, so a dynamic
    program over split points with prefix-sum segment costs is exact.
    O(l m log m) time, O(m l) memory.
    """
    values = np.asarray(values, dtype=float)
    m = values.size
    if m == 0:
        raise ValueError("empty vector")
    if not 1 <= l <= m:
        raise ValueError(f"l must be in [1, {m}], got {l}")
    if np.any(np.diff(values) < 0):
        raise ValueError("values must be ascending")
    w = np.ones(m) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (m,) or np.any(w <= 0):
        raise ValueError("weights must be positive, one per value")
    centred = values - (w @ values) / w.sum()
    w1 = np.concatenate(([0.0], np.cumsum(w)))
    s1 = np.concatenate(([0.0], np.cumsum(w * centred)))
    s2 = np.concatenate(([0.0], np.cumsum(w * centred**2)))
    # Splitting a run never raises the cost, so exactly l runs is optimal.
    _, back = _l0_kernel(w1, s1, s2, l)
    cuts = [m]
    i = m
    for k in range(l, 0, -1):
        i = int(back[k, i])
        cuts.append(i)
    boundaries = np.array(cuts[::-1], dtype=int)
    levels, sse = segment_sse(values, boundaries, None if weights is None else w)
    return L0Solution(boundaries=boundaries, levels=levels, sse=sse)
