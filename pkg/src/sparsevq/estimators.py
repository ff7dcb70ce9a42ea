"""scikit-learn transformers wrapping the quantizers.

``fit(X)`` learns a quantization of every value in ``X`` (any shape; it is
flattened). ``transform(X)`` maps each entry to the quantized level of the
nearest value seen during fit, so ``fit_transform(X)`` returns exactly the
quantized ``X`` with its original shape.

    >>> q = L0Quantizer(n_levels=2).fit([[1.0, 2.0], [10.0, 11.0]])
    >>> q.transform([[1.0, 11.0]]).tolist()
    [[1.5, 10.5]]
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import quantizers
from .core import extract_distinct
from .metrics import l2_loss
from .solvers import SolverConfig


def _check_values(X):
    return check_array(X, ensure_2d=False, allow_nd=True, dtype=np.float64)


class BaseQuantizer(TransformerMixin, BaseEstimator):
    """Shared fit/transform plumbing; subclasses implement ``_quantize``.

    Attributes set by ``fit``: ``result_`` (the :class:`QuantizedVector`),
    ``codebook_`` (ascending output levels), ``n_levels_``, ``loss_``
    (squared error on the fitted data), ``fitted_values_`` and
    ``fitted_levels_`` (the lookup table used by ``transform``).
    """

    def _quantize(self, w):
        raise NotImplementedError

    def _solver(self):
        return SolverConfig(tolerance=self.tol, max_sweeps=self.max_sweeps)

    def fit(self, X, y=None):
        X = _check_values(X)
        w = X.ravel()
        result = self._quantize(w)
        d = extract_distinct(w)
        self.result_ = result
        self.fitted_values_ = d.values
        self.fitted_levels_ = result.distinct_levels
        self.codebook_ = np.unique(result.distinct_levels)
        self.n_levels_ = result.distinct_count
        self.loss_ = l2_loss(w, result.data)
        return self

    def transform(self, X):
        check_is_fitted(self, "fitted_levels_")
        X = _check_values(X)
        flat = X.ravel()
        ref = self.fitted_values_
        pos = np.clip(np.searchsorted(ref, flat), 1, max(ref.size - 1, 1))
        if ref.size == 1:
            idx = np.zeros(flat.size, dtype=int)
        else:
            left = pos - 1
            idx = np.where(np.abs(flat - ref[left]) <= np.abs(ref[pos] - flat), left, pos)
        return self.fitted_levels_[idx].reshape(X.shape)

    def score(self, X, y=None):
        """Negative squared quantization error of ``X`` (higher is better)."""
        X = _check_values(X)
        return -l2_loss(X, self.transform(X))


class L1Quantizer(BaseQuantizer):
    def __init__(self, lambda1=1.0, refit=True, clamp=None, tol=1e-7, max_sweeps=10000):
        self.lambda1 = lambda1
        self.refit = refit
        self.clamp = clamp
        self.tol = tol
        self.max_sweeps = max_sweeps

    def _quantize(self, w):
        return quantizers.quantize_l1(w, self.lambda1, self.refit, self.clamp, self._solver())


class L1L2Quantizer(BaseQuantizer):
    def __init__(self, lambda1=1.0, lambda2=0.0, refit=True, clamp=None, tol=1e-7,
                 max_sweeps=10000):
        self.lambda1 = lambda1
        self.lambda2 = lambda2
        self.refit = refit
        self.clamp = clamp
        self.tol = tol
        self.max_sweeps = max_sweeps

    def _quantize(self, w):
        return quantizers.quantize_l1_l2(w, self.lambda1, self.lambda2, self.refit, self.clamp,
                                         self._solver())


class IterativeL1Quantizer(BaseQuantizer):
    def __init__(self, n_levels=8, lambda0=None, delta_lambda=None, max_rounds=200, clamp=None,
                 tol=1e-7, max_sweeps=10000):
        self.n_levels = n_levels
        self.lambda0 = lambda0
        self.delta_lambda = delta_lambda
        self.max_rounds = max_rounds
        self.clamp = clamp
        self.tol = tol
        self.max_sweeps = max_sweeps

    def _quantize(self, w):
        return quantizers.quantize_l1_iterative(w, self.n_levels, self.lambda0, self.delta_lambda,
                                                self.max_rounds, self.clamp, self._solver())


class L0Quantizer(BaseQuantizer):
    def __init__(self, n_levels=8, clamp=None, weighted=False):
        self.n_levels = n_levels
        self.clamp = clamp
        self.weighted = weighted

    def _quantize(self, w):
        return quantizers.quantize_l0(w, self.n_levels, self.clamp, self.weighted)


class ClusterLSQuantizer(BaseQuantizer):
    def __init__(self, n_levels=8, random_state=0, n_init=10, clamp=None, weighted=False):
        self.n_levels = n_levels
        self.random_state = random_state
        self.n_init = n_init
        self.clamp = clamp
        self.weighted = weighted

    def _quantize(self, w):
        return quantizers.quantize_cluster_ls(w, self.n_levels, self.random_state, self.n_init,
                                              self.clamp, self.weighted)


class KMeansQuantizer(BaseQuantizer):
    def __init__(self, n_levels=8, random_state=0, n_init=10, clamp=None, weighted=False):
        self.n_levels = n_levels
        self.random_state = random_state
        self.n_init = n_init
        self.clamp = clamp
        self.weighted = weighted

    def _quantize(self, w):
        return quantizers.quantize_kmeans(w, self.n_levels, self.random_state, self.n_init,
                                          self.clamp, self.weighted)


class UniformQuantizer(BaseQuantizer):
    def __init__(self, n_levels=8, clamp=None):
        self.n_levels = n_levels
        self.clamp = clamp

    def _quantize(self, w):
        return quantizers.quantize_uniform(w, self.n_levels, self.clamp)

