"""Seeded 1-D k-means (k-means++ seeding, Lloyd iterations, restarts)."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray
    centers: np.ndarray
    k: int
    inertia: float
    seed: int
    restarts_used: int
    n_iter: int = 0
    inertia_history: tuple = ()
    restart_times: tuple = field(default=(), compare=False)


def _as_values(values, weights):
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty vector")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input")
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float).ravel()
    if w.shape != x.shape or np.any(w <= 0):
        raise ValueError("weights must be positive, one per value")
    return x, w


@njit(cache=True)
def _assign(x, centers, labels):
    # Full distance table, O(m k) per pass; ties go to the lower-indexed center.
    for i in range(x.shape[0]):
        best = np.inf
        for c in range(centers.shape[0]):
            dist = (x[i] - centers[c]) ** 2
            if dist < best:
                best = dist
                labels[i] = c


@njit(cache=True)
def _means(x, w, labels, centers):
    k = centers.shape[0]
    wsum = np.zeros(k)
    xsum = np.zeros(k)
    for i in range(x.shape[0]):
        wsum[labels[i]] += w[i]
        xsum[labels[i]] += w[i] * x[i]
    empty = np.zeros(k, dtype=np.bool_)
    for c in range(k):
        if wsum[c] > 0:
            centers[c] = xsum[c] / wsum[c]
        else:
            empty[c] = True
    return empty


@njit(cache=True)
def _inertia(x, w, labels, centers):
    tot = 0.0
    for i in range(x.shape[0]):
        tot += w[i] * (x[i] - centers[labels[i]]) ** 2
    return tot


@njit(cache=True)
def _lloyd_kernel(x, w, centers, max_iter):
    m = x.shape[0]
    labels = np.zeros(m, dtype=np.int64)
    new = np.zeros(m, dtype=np.int64)
    _assign(x, centers, labels)
    history = np.empty(max_iter + 1)
    history[0] = _inertia(x, w, labels, centers)
    n_iter = 0
    for it in range(1, max_iter + 1):
        n_iter = it
        empty = _means(x, w, labels, centers)
        for c in range(centers.shape[0]):
            if empty[c]:
                # re-seed an empty cluster at the point farthest from its center
                far = 0
                worst = -1.0
                for i in range(m):
                    dist = (x[i] - centers[labels[i]]) ** 2
                    if dist > worst:
                        worst = dist
                        far = i
                centers[c] = x[far]
                labels[far] = c
        _assign(x, centers, new)
        history[it] = _inertia(x, w, new, centers)
        same = True
        for i in range(m):
            if new[i] != labels[i]:
                same = False
                labels[i] = new[i]
        if same:
            break
    _means(x, w, labels, centers)
    return labels, _inertia(x, w, labels, centers), n_iter, history[:n_iter + 1]


@njit(cache=True)
def _plusplus_kernel(x, w, u):
    # u holds one uniform draw per center
    m = x.shape[0]
    k = u.shape[0]
    centers = np.empty(k)
    closest = np.empty(m)
    cdf = np.empty(m)
    for c in range(k):
        acc = 0.0
        for i in range(m):
            acc += w[i] if c == 0 else w[i] * closest[i]
            cdf[i] = acc
        if acc > 0.0:
            idx = np.searchsorted(cdf, u[c] * acc, side="right")
            if idx >= m:
                idx = m - 1
        else:
            # every point already sits on a center; any pick is as good
            idx = min(int(u[c] * m), m - 1)
        centers[c] = x[idx]
        for i in range(m):
            dist = (x[i] - centers[c]) ** 2
            if c == 0 or dist < closest[i]:
                closest[i] = dist
    return centers


def _plusplus(x, w, k, rng):
    return _plusplus_kernel(x, w, rng.random(k))


def _lloyd(x, w, k, rng, max_iter):
    centers = _plusplus(x, w, k, rng)
    labels, inertia, n_iter, history = _lloyd_kernel(x, w, centers, max_iter)
    return labels, centers, inertia, n_iter, list(history)


def kmeans_1d(values, k: int, seed: int = 0, restarts: int = 10, weights=None,
              max_iter: int = 300) -> ClusterAssignment:
    """Best-of-``restarts`` Lloyd clustering of 1-D ``values`` into ``k`` groups.

    Restart ``r`` draws from ``PCG64(SeedSequence(seed).spawn(restarts)[r])``,
    so results depend only on ``(values, k, seed, restarts, weights)``.
    Ties in inertia go to the earliest restart.
    """
    x, w = _as_values(values, weights)
    if not 1 <= k <= x.size:
        raise ValueError(f"k must be in [1, {x.size}], got {k}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    best = None
    times = []
    for r, child in enumerate(np.random.SeedSequence(seed).spawn(restarts)):
        t0 = time.perf_counter()
        run = _lloyd(x, w, k, np.random.Generator(np.random.PCG64(child)), max_iter)
        times.append(time.perf_counter() - t0)
        if best is None or run[2] < best[2]:
            best = run
    labels, centers, inertia, n_iter, history = best
    return ClusterAssignment(
        labels=labels, centers=centers, k=k, inertia=inertia, seed=seed,
        restarts_used=restarts, n_iter=n_iter, inertia_history=tuple(history),
        restart_times=tuple(times),
    )


def assignment_segments(a: ClusterAssignment, sorted_values) -> np.ndarray:
    """Segment boundaries ``[0, b_1, ..., m]`` of a contiguous 1-D assignment.

    Clusters are relabeled in ascending-center order first. Raises if some
    cluster's members are not one contiguous run of ``sorted_values``.
    """
    x = np.asarray(sorted_values, dtype=float)
    labels = np.asarray(a.labels)
    if labels.shape != x.shape:
        raise ValueError("labels and values differ in length")
    if np.any(np.diff(x) < 0):
        raise ValueError("values must be sorted ascending")
    used = np.unique(labels)
    order = used[np.argsort(a.centers[used], kind="stable")]
    rank = np.empty(a.k, dtype=int)
    rank[order] = np.arange(order.size)
    relabeled = rank[labels]
    if np.any(np.diff(relabeled) < 0):
        raise ValueError("non-contiguous assignment")
    cuts = np.flatnonzero(np.diff(relabeled)) + 1
    return np.concatenate(([0], cuts, [x.size]))
