"""End-to-end quantizers: arbitrary vector in, :class:`QuantizedVector` out.

Every method works on the ascending distinct values of the input and maps
the result back through the index map. An optional ``clamp=(a, b)`` is
applied after reconstruction.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import solvers
from .clustering import assignment_segments, kmeans_1d
from .core import (QuantizedVector, SortedDistinctVector, apply_basis, build_step_basis,
                   extract_distinct, scatter_to_original)
from .metrics import hard_sigmoid
from .solvers import SolverConfig

logger = logging.getLogger(__name__)

METHODS = ("l1", "l1_refit", "l1_iterative", "l1_l2", "l0", "cluster_ls", "kmeans", "uniform")
_NEEDS_LAMBDA = {"l1", "l1_refit", "l1_l2"}
_NEEDS_L = {"l1_iterative", "l0", "cluster_ls", "kmeans", "uniform"}


class IterationLimitError(RuntimeError):
    """Iterative L1 ran out of rounds; ``best`` holds the smallest-support result."""

    def __init__(self, message, best: QuantizedVector):
        super().__init__(message)
        self.best = best


def _finish(d: SortedDistinctVector, levels, method, params, clamp, **extra) -> QuantizedVector:
    levels = np.asarray(levels, dtype=float)
    if clamp is not None:
        levels = hard_sigmoid(levels, *clamp)
    data = scatter_to_original(d, levels)
    params = dict(params)
    if clamp is not None:
        params["clamp"] = tuple(clamp)
    return QuantizedVector(data=data, distinct_count=int(np.unique(levels).size), method=method,
                           params=params, distinct_levels=levels, **extra)


def _n_runs(support) -> int:
    """Distinct levels produced by a refit on ``support`` (leading zero run included)."""
    if support.size == 0:
        return 1
    return support.size + int(support[0] > 0)


def _l1_family(w, lambda1, lambda2, refit, clamp, solver, method):
    d = extract_distinct(w)
    b = build_step_basis(d)
    cfg = SolverConfig(
        tolerance=solver.tolerance if solver else 1e-7,
        max_sweeps=solver.max_sweeps if solver else 10000,
        lambda1=lambda1, lambda2=lambda2,
    )
    if lambda2 > 0:
        coef, trace = solvers.lasso_neg_l2_cd(b, d.values, cfg)
    else:
        coef, trace = solvers.lasso_cd(b, d.values, cfg)
    support = coef.support
    if refit:
        levels = solvers.refit_levels(d.values, support)
        if support.size:
            coef = solvers.post_ls_refit(b, d.values, support)
    else:
        levels = apply_basis(b, coef.alpha)
    params = {"lambda1": lambda1, "lambda2": lambda2, "refit": refit, "sweeps": trace.sweeps_run}
    return _finish(d, levels, method, params, clamp, support_size=int(support.size),
                   coefficients=coef)


def quantize_l1(w, lambda1: float, refit: bool = True, clamp=None,
                solver: SolverConfig | None = None) -> QuantizedVector:
    """L1-penalized step-basis fit, optionally followed by a least-squares refit."""
    if not lambda1 >= 0:
        raise ValueError("lambda1 must be >= 0")
    return _l1_family(w, lambda1, 0.0, refit, clamp, solver, "l1_refit" if refit else "l1")


def quantize_l1_l2(w, lambda1: float, lambda2: float, refit: bool = True, clamp=None,
                   solver: SolverConfig | None = None) -> QuantizedVector:
    if not lambda1 >= 0:
        raise ValueError("lambda1 must be >= 0")
    if not lambda2 >= 0:
        raise ValueError("lambda2 must be >= 0")
    return _l1_family(w, lambda1, lambda2, refit, clamp, solver, "l1_l2")


def suggest_lambda0(w, l: int, max_rounds: int = 200, solver: SolverConfig | None = None) -> float:
    """Pick a starting penalty for :func:`quantize_l1_iterative`.

    Bisects (in log space, to 1 %) for the smallest penalty whose refit has
    at most ``l`` levels, then returns that penalty divided by half the round
    budget. The linear schedule then reaches the crossing in about
    ``max_rounds / 2`` rounds with roughly 1 % resolution.
    """
    d = extract_distinct(w)
    b = build_step_basis(d)
    lam_max = solvers.lambda_max(b, d.values)
    if lam_max == 0:
        return 1.0
    steps = max(1, max_rounds // 2)
    if l >= d.m:
        return lam_max * 1e-6
    tol = solver.tolerance if solver else 1e-7

    def levels_at(lam):
        coef, _ = solvers.lasso_cd(b, d.values, SolverConfig(tolerance=tol, lambda1=lam))
        return _n_runs(coef.support)

    lo, hi = lam_max * 1e-12, lam_max
    if levels_at(lo) <= l:
        return lo
    while hi / lo > 1.01:
        mid = np.sqrt(lo * hi)
        if levels_at(mid) <= l:
            hi = mid
        else:
            lo = mid
    return hi / steps


def quantize_l1_iterative(w, l: int, lambda0: float | None = None,
                          delta_lambda: float | None = None, max_rounds: int = 200,
                          clamp=None, solver: SolverConfig | None = None) -> QuantizedVector:
    """Raise the L1 penalty linearly until the refit has at most ``l`` levels.

    Round ``t`` (1-based) uses ``lambda0 + (t - 1) * delta_lambda`` and warm
    starts from the previous round's refitted coefficients. ``delta_lambda``
    defaults to ``lambda0``; ``lambda0`` defaults to :func:`suggest_lambda0`.
    The achieved size may undershoot ``l``.
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    if lambda0 is None:
        lambda0 = suggest_lambda0(w, l, max_rounds, solver)
    if not lambda0 > 0:
        raise ValueError("lambda0 must be > 0")
    if delta_lambda is None:
        delta_lambda = lambda0
    if not delta_lambda > 0:
        raise ValueError("delta_lambda must be > 0")
    d = extract_distinct(w)
    b = build_step_basis(d)
    tol = solver.tolerance if solver else 1e-7
    sweeps = solver.max_sweeps if solver else 10000

    alpha = None
    best = None
    for t in range(1, max_rounds + 1):
        lam = lambda0 + (t - 1) * delta_lambda
        coef, _ = solvers.lasso_cd(b, d.values, SolverConfig(tol, sweeps, lam), alpha0=alpha)
        support = coef.support
        if support.size:
            coef = solvers.post_ls_refit(b, d.values, support)
        alpha = coef.alpha
        n_levels = _n_runs(support)
        params = {"l": l, "lambda0": lambda0, "delta_lambda": delta_lambda,
                  "lambda1": lam, "rounds": t}
        if best is None or (support.size, n_levels) < best[0]:
            best = ((support.size, n_levels), params, support, coef)
        if support.size <= l and n_levels <= l:
            break
    else:
        _, params, support, coef = best
        result = _finish(d, solvers.refit_levels(d.values, support), "l1_iterative", params,
                         clamp, support_size=int(support.size), coefficients=coef)
        raise IterationLimitError(
            f"support still {support.size} > {l} after {max_rounds} rounds", result)
    logger.debug("l1_iterative reached %d levels in %d rounds", n_levels, t)
    return _finish(d, solvers.refit_levels(d.values, support), "l1_iterative", params, clamp,
                   support_size=int(support.size), coefficients=coef)


def _target_size(l, d):
    if l < 1:
        raise ValueError("l must be >= 1")
    return min(int(l), d.m)


def quantize_l0(w, l: int, clamp=None, weighted: bool = False) -> QuantizedVector:
    """Globally optimal quantizer with at most ``l`` levels (exact DP)."""
    d = extract_distinct(w)
    k = _target_size(l, d)
    sol = solvers.solve_l0_dp(d.values, k, d.counts() if weighted else None)
    return _finish(d, sol.fitted(), "l0", {"l": l, "weighted": weighted}, clamp,
                   support_size=len(sol.levels))


def quantize_cluster_ls(w, l: int, seed: int = 0, restarts: int = 10, clamp=None,
                        weighted: bool = False) -> QuantizedVector:
    """k-means picks the grouping, least squares picks each group's value.

    With the grouping fixed, the least-squares problem separates by segment
    and each segment's optimum is the (weighted) mean of its members.
    """
    d = extract_distinct(w)
    k = _target_size(l, d)
    weights = d.counts() if weighted else None
    a = kmeans_1d(d.values, k, seed=seed, restarts=restarts, weights=weights)
    bounds = assignment_segments(a, d.values)
    levels, _ = solvers.segment_sse(d.values, bounds, weights)
    fitted = np.repeat(levels, np.diff(bounds))
    params = {"l": l, "seed": seed, "restarts": restarts, "weighted": weighted}
    return _finish(d, fitted, "cluster_ls", params, clamp, support_size=len(levels),
                   assignment=a)


def quantize_kmeans(w, l: int, seed: int = 0, restarts: int = 10, clamp=None,
                    weighted: bool = False) -> QuantizedVector:
    """Baseline: replace each value by its k-means center."""
    d = extract_distinct(w)
    k = _target_size(l, d)
    a = kmeans_1d(d.values, k, seed=seed, restarts=restarts,
                  weights=d.counts() if weighted else None)
    params = {"l": l, "seed": seed, "restarts": restarts, "weighted": weighted}
    return _finish(d, a.centers[a.labels], "kmeans", params, clamp,
                   support_size=int(np.unique(a.labels).size), assignment=a)


def uniform_levels(lo: float, hi: float, l: int) -> np.ndarray:
    return np.linspace(lo, hi, l)


def quantize_uniform(w, l: int, clamp=None) -> QuantizedVector:
    """Snap to ``l`` evenly spaced levels over ``[min(w), max(w)]``; ties go down."""
    if l < 2:
        raise ValueError("uniform quantization needs l >= 2")
    d = extract_distinct(w)
    x = d.values
    grid = uniform_levels(x[0], x[-1], l)
    hi = np.clip(np.searchsorted(grid, x, side="left"), 1, l - 1)
    lo = hi - 1
    pick = np.where(np.abs(x - grid[lo]) <= np.abs(grid[hi] - x), lo, hi)
    return _finish(d, grid[pick], "uniform", {"l": l}, clamp)


@dataclass(frozen=True)
class QuantizeRequest:
    method: str
    lambda1: float | None = None
    lambda2: float = 0.0
    target_l: int | None = None
    clamp: tuple | None = None
    seed: int = 0
    restarts: int = 10
    weighted: bool = False
    refit: bool = True
    lambda0: float | None = None
    delta_lambda: float | None = None
    max_rounds: int = 200
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.method in _NEEDS_LAMBDA and self.lambda1 is None:
            raise ValueError(f"method {self.method} requires lambda1")
        if self.method in _NEEDS_L and self.target_l is None:
            raise ValueError(f"method {self.method} requires target_l")
        if self.clamp is not None and not self.clamp[0] < self.clamp[1]:
            raise ValueError("clamp range needs a < b")
        if self.lambda1 is not None and not self.lambda1 >= 0:
            raise ValueError("lambda1 must be >= 0")
        if not self.lambda2 >= 0:
            raise ValueError("lambda2 must be >= 0")
        if self.target_l is not None and self.target_l < 1:
            raise ValueError("target_l must be >= 1")
        if self.restarts < 1 or self.max_rounds < 1:
            raise ValueError("restarts and max_rounds must be >= 1")

    def params(self) -> dict:
        """The parameters that actually drive this method (for report keys)."""
        out = self._method_params()
        if self.clamp is not None:
            out["clamp"] = list(self.clamp)
        return out

    def _method_params(self) -> dict:
        if self.method in ("l1", "l1_refit"):
            return {"lambda1": self.lambda1}
        if self.method == "l1_l2":
            return {"lambda1": self.lambda1, "lambda2": self.lambda2, "refit": self.refit}
        if self.method == "l1_iterative":
            return {"l": self.target_l, "lambda0": self.lambda0,
                    "delta_lambda": self.delta_lambda, "max_rounds": self.max_rounds}
        if self.method in ("cluster_ls", "kmeans"):
            return {"l": self.target_l, "restarts": self.restarts, "weighted": self.weighted}
        if self.method == "l0":
            return {"l": self.target_l, "weighted": self.weighted}
        return {"l": self.target_l}


def quantize(w, req: QuantizeRequest) -> QuantizedVector:
    m = req.method
    if m in ("l1", "l1_refit"):
        return quantize_l1(w, req.lambda1, refit=m == "l1_refit", clamp=req.clamp,
                           solver=req.solver)
    if m == "l1_l2":
        return quantize_l1_l2(w, req.lambda1, req.lambda2, refit=req.refit, clamp=req.clamp,
                              solver=req.solver)
    if m == "l1_iterative":
        return quantize_l1_iterative(w, req.target_l, req.lambda0, req.delta_lambda,
                                     req.max_rounds, clamp=req.clamp, solver=req.solver)
    if m == "l0":
        return quantize_l0(w, req.target_l, clamp=req.clamp, weighted=req.weighted)
    if m == "cluster_ls":
        return quantize_cluster_ls(w, req.target_l, req.seed, req.restarts, req.clamp,
                                   req.weighted)
    if m == "kmeans":
        return quantize_kmeans(w, req.target_l, req.seed, req.restarts, req.clamp, req.weighted)
    return quantize_uniform(w, req.target_l, clamp=req.clamp)
