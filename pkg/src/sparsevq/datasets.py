"""Seeded synthetic data and file-backed datasets."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("mog", "uniform", "gaussian", "csv", "pgm")


def default_mog(lo: float, hi: float) -> tuple[tuple[float, float, float], ...]:
    """Three equal-weight bumps at 20/50/80 % of the range, width 8 %.

    An illustrative default; override it for anything that needs exact shapes.
    """
    span = hi - lo
    return tuple((1 / 3, lo + f * span, 0.08 * span) for f in (0.2, 0.5, 0.8))


@dataclass(frozen=True)
class DatasetSpec:
    kind: str
    n: int = 500
    range: tuple[float, float] = (0.0, 100.0)
    seed: int = 0
    path: str | None = None
    mog_components: tuple | None = None
    mean: float | None = None
    stddev: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown dataset kind {self.kind!r}")
        if self.kind in ("csv", "pgm"):
            if not self.path:
                raise ValueError(f"{self.kind} dataset needs a path")
            return
        if self.n < 1:
            raise ValueError("n must be >= 1")
        lo, hi = self.range
        if not lo < hi:
            raise ValueError("range needs lo < hi")
        if self.kind == "mog" and self.mog_components is not None:
            weights = np.array([c[0] for c in self.mog_components], dtype=float)
            if weights.size == 0 or np.any(weights <= 0):
                raise ValueError("mixture weights must be positive")
            if abs(weights.sum() - 1.0) > 1e-9:
                raise ValueError("mixture weights must sum to 1")
            if any(c[2] < 0 for c in self.mog_components):
                raise ValueError("mixture stddevs must be >= 0")
        if self.stddev is not None and self.stddev < 0:
            raise ValueError("stddev must be >= 0")

    @property
    def name(self) -> str:
        if self.kind in ("csv", "pgm"):
            return f"{self.kind}:{self.path}"
        return f"{self.kind}(n={self.n},seed={self.seed})"

    def components(self):
        lo, hi = self.range
        if self.kind == "gaussian":
            mean = (lo + hi) / 2 if self.mean is None else self.mean
            sd = (hi - lo) / 6 if self.stddev is None else self.stddev
            return ((1.0, mean, sd),)
        return tuple(self.mog_components or default_mog(lo, hi))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def _draw_mixture(rng, comps, size):
    _, means, sds = (np.array(c, dtype=float) for c in zip(*comps))
    if len(comps) == 1:
        return rng.normal(means[0], sds[0], size)
    weights = np.array([c[0] for c in comps], dtype=float)
    idx = rng.choice(len(comps), size=size, p=weights / weights.sum())
    return rng.normal(means[idx], sds[idx])


def generate(spec: DatasetSpec) -> np.ndarray:
    """Draw ``spec.n`` samples, re-drawing (not clipping) anything outside the range."""
    if spec.kind == "csv":
        from .io import read_csv
        return np.asarray(read_csv(spec.path))
    if spec.kind == "pgm":
        from .io import read_pgm
        return read_pgm(spec.path).pixels.copy()
    rng = make_rng(spec.seed)
    lo, hi = spec.range
    out = np.empty(0)
    drawn = 0
    budget = 1000 * spec.n
    while out.size < spec.n:
        need = spec.n - out.size
        if drawn + need > budget:
            raise ValueError("distribution incompatible with range")
        if spec.kind == "uniform":
            x = rng.uniform(lo, hi, need)
        else:
            x = _draw_mixture(rng, spec.components(), need)
        drawn += need
        out = np.concatenate((out, x[(x >= lo) & (x <= hi)]))
    return out
