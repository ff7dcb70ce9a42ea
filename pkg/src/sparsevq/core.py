"""Distinct-value extraction and the step basis.

All quantizers work on the ascending distinct values of the input. A
coefficient vector ``alpha`` over the step basis reconstructs a vector whose
entry ``i`` is ``sum(diffs[j] * alpha[j] for j <= i)``; zeros in ``alpha``
make neighbouring entries share a value.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SortedDistinctVector:
    """Ascending distinct values of a vector plus the map back to it."""

    values: np.ndarray
    index_map: np.ndarray
    original_len: int

    @property
    def m(self) -> int:
        return len(self.values)

    def counts(self) -> np.ndarray:
        """Multiplicity of each distinct value in the original vector."""
        return np.bincount(self.index_map, minlength=self.m).astype(float)


@dataclass(frozen=True)
class StepBasis:
    """Implicit lower-triangular basis ``N[i, j] = diffs[j] if j <= i else 0``."""

    base_values: np.ndarray
    diffs: np.ndarray

    @property
    def m(self) -> int:
        return len(self.diffs)

    def column_sq_norms(self) -> np.ndarray:
        """Squared column norms, ``diffs[j]**2 * (m - j)``."""
        return self.diffs**2 * np.arange(self.m, 0, -1)

    def dense(self) -> np.ndarray:
        """Materialize the m x m matrix. Only meant for small test oracles."""
        return np.tril(np.broadcast_to(self.diffs, (self.m, self.m)))


@dataclass(frozen=True)
class SparseCoefficients:
    alpha: np.ndarray
    lambda1: float = 0.0
    lambda2: float = 0.0
    iterations: int = 0

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.alpha)

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.alpha))


@dataclass
class QuantizedVector:
    """Result of a quantizer run.

    ``distinct_levels`` holds the quantized value of each input distinct
    value (same order as ``SortedDistinctVector.values``), which is what the
    distinct-value loss and the sklearn wrappers need.
    """

    data: np.ndarray
    distinct_count: int
    method: str
    params: dict = field(default_factory=dict)
    distinct_levels: np.ndarray | None = None
    support_size: int | None = None
    coefficients: SparseCoefficients | None = None
    assignment: object = None

    @property
    def codebook(self) -> np.ndarray:
        return np.unique(self.data)


def _as_finite_vector(w) -> np.ndarray:
    w = np.asarray(w, dtype=float).ravel()
    if w.size == 0:
        raise ValueError("empty vector")
    if not np.all(np.isfinite(w)):
        raise ValueError("non-finite input")
    return w


def extract_distinct(w) -> SortedDistinctVector:
    """Deduplicate ``w`` (exact equality) into ascending values and an index map."""
    w = _as_finite_vector(w)
    values, inverse = np.unique(w, return_inverse=True)
    return SortedDistinctVector(values=values, index_map=inverse.ravel(), original_len=w.size)


def build_step_basis(d: SortedDistinctVector) -> StepBasis:
    values = np.asarray(d.values, dtype=float)
    diffs = np.empty_like(values)
    diffs[0] = values[0]
    diffs[1:] = np.diff(values)
    return StepBasis(base_values=values.copy(), diffs=diffs)


def apply_basis(b: StepBasis, alpha) -> np.ndarray:
    """Compute ``N @ alpha`` as a running sum in O(m)."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (b.m,):
        raise ValueError(f"alpha has length {alpha.size}, basis has {b.m} columns")
    return np.cumsum(b.diffs * alpha)


def scatter_to_original(d: SortedDistinctVector, q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (d.m,):
        raise ValueError(f"expected {d.m} distinct levels, got {q.size}")
    return q[d.index_map]


def flatten_matrix(rows) -> tuple[np.ndarray, tuple[int, ...]]:
    """Row-major flatten of a rectangular array; returns ``(flat, shape)``."""
    try:
        arr = np.asarray(rows, dtype=float)
    except ValueError as exc:
        raise ValueError("ragged rows: input is not rectangular") from exc
    if arr.dtype == object:
        raise ValueError("ragged rows: input is not rectangular")
    return arr.ravel(order="C").copy(), arr.shape


def restore_matrix(flat, shape) -> np.ndarray:
    return np.asarray(flat, dtype=float).reshape(shape, order="C")
