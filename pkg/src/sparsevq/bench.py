"""Benchmark sweeps: every (dataset, method, parameter, seed) cell becomes a report row."""
from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .core import extract_distinct
from .datasets import DatasetSpec, generate
from .io import atomic_write
from .metrics import l2_loss
from .quantizers import METHODS, QuantizeRequest, quantize
from .solvers import SolverConfig

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
TIMING_PREFIX = "wall_time"
CSV_FIELDS = ("dataset", "method", "params", "seed", "loss_full", "loss_distinct",
              "distinct_count", "wall_time_s", "error")
NOTES = (
    "kmeans and cluster_ls cluster the distinct values unless params.weighted is true",
    "loss_full is over the original vector, loss_distinct over its distinct values",
    "default mixture/gaussian parameters are illustrative approximations",
)

# sweepable parameter name -> QuantizeRequest field
_GRID_KEYS = {"lambda1": "lambda1", "lambda2": "lambda2", "l": "target_l",
              "lambda0": "lambda0", "delta_lambda": "delta_lambda"}


@dataclass
class BenchReport:
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_jsonl(self) -> str:
        lines = [json.dumps({"meta": self.meta}, sort_keys=True)]
        lines += [json.dumps(r, sort_keys=True) for r in self.rows]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, extrasaction="ignore",
                                lineterminator="\n")
        writer.writeheader()
        for r in self.rows:
            writer.writerow({**r, "params": json.dumps(r["params"], sort_keys=True)})
        return buf.getvalue()

    def write(self, path, csv_path=None) -> None:
        with atomic_write(path) as fh:
            fh.write(self.to_jsonl())
        if csv_path:
            with atomic_write(csv_path) as fh:
                fh.write(self.to_csv())

    @classmethod
    def from_jsonl(cls, text: str) -> "BenchReport":
        objs = [json.loads(line) for line in text.splitlines() if line.strip()]
        return cls(rows=objs[1:], meta=objs[0]["meta"])

    def without_timing(self) -> "BenchReport":
        rows = [{k: v for k, v in r.items() if not k.startswith(TIMING_PREFIX)} for r in self.rows]
        return BenchReport(rows=rows, meta=dict(self.meta))


def _dataset(cfg, default_seed) -> DatasetSpec:
    cfg = dict(cfg)
    cfg.setdefault("seed", default_seed)
    for key in ("range",):
        if key in cfg:
            cfg[key] = tuple(cfg[key])
    if cfg.get("mog_components") is not None:
        cfg["mog_components"] = tuple(tuple(c) for c in cfg["mog_components"])
    return DatasetSpec(**cfg)


def _cells(method_cfg):
    """Expand list-valued sweep keys into the cartesian grid of requests."""
    cfg = dict(method_cfg)
    method = cfg.pop("method")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    grid = {k: (v if isinstance(v, list) else [v]) for k, v in cfg.items() if k in _GRID_KEYS}
    fixed = {k: v for k, v in cfg.items() if k not in _GRID_KEYS}
    keys = list(grid)
    for combo in itertools.product(*(grid[k] for k in keys)):
        yield method, {_GRID_KEYS[k]: v for k, v in zip(keys, combo)}, fixed


def run_bench(spec: dict, command=None) -> BenchReport:
    """Run a sweep described by a plain dict (usually loaded from JSON).

    Keys: ``seed`` (int), ``seeds`` (list, defaults to ``[seed]``),
    ``datasets`` (list of :class:`DatasetSpec` fields), ``methods`` (list of
    ``{"method": ..., <param>: value or list}``), ``clamp`` (``[a, b]`` or
    null), ``solver`` (``{"tolerance", "max_sweeps"}``). Failing cells become
    rows with an ``error`` message.
    """
    seed = int(spec.get("seed", 0))
    seeds = [int(s) for s in spec.get("seeds", [seed])]
    clamp = tuple(spec["clamp"]) if spec.get("clamp") else None
    solver = SolverConfig(**spec.get("solver", {}))
    report = BenchReport(meta={
        "schema_version": SCHEMA_VERSION, "seed": seed,
        "command": list(command) if command is not None else None, "notes": list(NOTES),
    })
    for ds_cfg in spec.get("datasets", []):
        ds = _dataset(ds_cfg, seed)
        w = generate(ds)
        n_distinct = extract_distinct(w).m
        for method_cfg in spec.get("methods", []):
            for method, grid_params, fixed in _cells(method_cfg):
                for cell_seed in seeds:
                    report.rows.append(
                        _run_cell(w, ds, method, grid_params, fixed, cell_seed, clamp, solver,
                                  n_distinct))
    return report


def _run_cell(w, ds, method, grid_params, fixed, seed, clamp, solver, n_distinct):
    row = {"dataset": ds.name, "method": method, "seed": seed, "loss_full": None,
           "loss_distinct": None, "distinct_count": None, "wall_time_s": None, "error": None}
    try:
        req = QuantizeRequest(method=method, clamp=clamp, seed=seed, solver=solver,
                              **grid_params, **fixed)
        row["params"] = req.params()
        t0 = time.perf_counter()
        q = quantize(w, req)
        row["wall_time_s"] = time.perf_counter() - t0
    except Exception as exc:  # recorded, sweep continues
        logger.warning("cell %s %s failed: %s", method, grid_params, exc)
        row.setdefault("params", {**grid_params, **fixed})
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    d = extract_distinct(w)
    row["loss_full"] = l2_loss(w, q.data)
    row["loss_distinct"] = l2_loss(d.values, q.distinct_levels)
    row["distinct_count"] = q.distinct_count
    row["n_distinct_input"] = n_distinct
    if q.assignment is not None:
        row["wall_time_restarts_s"] = list(q.assignment.restart_times)
    return row
