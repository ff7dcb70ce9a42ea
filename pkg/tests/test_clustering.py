import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sparsevq.clustering import ClusterAssignment, assignment_segments, kmeans_1d
from sparsevq.solvers import solve_l0_dp


def brute_two_partition(x):
    best = np.inf
    for mask in itertools.product([0, 1], repeat=len(x)):
        mask = np.array(mask)
        if mask.min() == mask.max():
            continue
        cost = sum(((x[mask == g] - x[mask == g].mean()) ** 2).sum() for g in (0, 1))
        best = min(best, cost)
    return best


def test_two_clusters_example():
    x = np.array([0.0, 1.0, 10.0, 11.0])
    a = kmeans_1d(x, 2, seed=3)
    assert a.inertia == pytest.approx(brute_two_partition(x)) == 1.0
    assert sorted(a.centers.tolist()) == [0.5, 10.5]
    assert a.labels[0] == a.labels[1] != a.labels[2] == a.labels[3]


def test_single_and_full(rng):
    x = rng.normal(size=20)
    one = kmeans_1d(x, 1)
    assert one.centers[0] == pytest.approx(x.mean()) and np.all(one.labels == 0)
    full = kmeans_1d(np.sort(x), 20)
    assert full.inertia == 0.0
    assert np.unique(full.labels).size == 20


@pytest.mark.parametrize("k", [0, 5])
def test_k_out_of_range(k):
    with pytest.raises(ValueError):
        kmeans_1d([1.0, 2.0, 3.0, 4.0], k)


def test_restarts_validated():
    with pytest.raises(ValueError):
        kmeans_1d([1.0, 2.0], 1, restarts=0)


def test_deterministic(rng):
    x = rng.uniform(0, 100, 300)
    a, b = kmeans_1d(x, 7, seed=11), kmeans_1d(x, 7, seed=11)
    assert np.array_equal(a.labels, b.labels) and np.array_equal(a.centers, b.centers)
    assert (a.inertia, a.n_iter, a.inertia_history) == (b.inertia, b.n_iter, b.inertia_history)
    assert len(a.restart_times) == a.restarts_used == 10


def test_lloyd_history_non_increasing(rng):
    x = rng.uniform(0, 100, 400)
    a = kmeans_1d(x, 12, seed=2, restarts=1)
    h = np.array(a.inertia_history)
    assert np.all(np.diff(h) <= 1e-9 * h[0])
    assert a.inertia <= h[-1] + 1e-9


def test_weighted_pulls_center():
    x = np.array([0.0, 1.0, 10.0, 11.0])
    a = kmeans_1d(x, 2, weights=[1, 3, 1, 1])
    assert sorted(a.centers.tolist())[0] == pytest.approx(0.75)


def test_empty_cluster_repair():
    # duplicated points force identical seeds; repair must still give k clusters
    x = np.array([0.0, 0.0, 0.0, 5.0, 5.0, 9.0])
    a = kmeans_1d(x, 3, seed=0)
    assert np.unique(a.labels).size == 3
    assert a.inertia == pytest.approx(0.0)


@given(st.integers(1, 40), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_invariants(m, k, seed):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0, 50, m))
    k = min(k, m)
    a = kmeans_1d(x, k, seed=seed, restarts=3)
    assert a.labels.min() >= 0 and a.labels.max() < k
    assert np.all(np.isfinite(a.centers)) and a.inertia >= 0
    assert a.inertia >= solve_l0_dp(x, k).sse - 1e-9
    bounds = assignment_segments(a, x)
    assert bounds[0] == 0 and bounds[-1] == m and np.all(np.diff(bounds) > 0)


def test_equal_to_dp_on_separated_data(rng):
    x = np.sort(np.concatenate([c + rng.uniform(-1, 1, 30) for c in (0, 50, 100, 150)]))
    assert kmeans_1d(x, 4).inertia == pytest.approx(solve_l0_dp(x, 4).sse)


def _assignment(labels, centers):
    labels = np.array(labels)
    return ClusterAssignment(labels=labels, centers=np.array(centers, dtype=float),
                             k=len(centers), inertia=0.0, seed=0, restarts_used=1)


@pytest.mark.parametrize("labels, centers, out", [
    ([0, 0, 1, 1], [1.5, 3.5], [0, 2, 4]),
    ([0, 0, 0], [2.0], [0, 3]),
    ([1, 1, 0, 0], [3.5, 1.5], [0, 2, 4]),
])
def test_assignment_segments(labels, centers, out):
    x = np.arange(1.0, len(labels) + 1)
    assert assignment_segments(_assignment(labels, centers), x).tolist() == out


def test_assignment_non_contiguous():
    with pytest.raises(ValueError, match="non-contiguous"):
        assignment_segments(_assignment([0, 1, 0], [1.0, 2.0]), [1.0, 2.0, 3.0])
