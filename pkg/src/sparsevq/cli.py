"""Command-line entry point: ``sparsevq {quantize,image,gen,bench,oracle}``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

import numpy as np

from . import quantizers
from .bench import run_bench
from .core import extract_distinct, restore_matrix
from .datasets import DatasetSpec, generate
from .io import ImageBuffer, atomic_write, read_csv_rows, read_pgm, write_csv, write_pgm
from .metrics import l2_loss
from .oracles import exhaustive_l0
from .solvers import SolverConfig, solve_l0_dp

SEED_ENV = "SPARSEVQ_SEED"


class UsageError(Exception):
    pass


def _pair(text):
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}") from None
    return lo, hi


def _mog(text):
    comps = []
    for part in text.split(";"):
        try:
            w, mu, sd = (float(x) for x in part.split(":"))
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"expected 'weight:mean:sd;...', got {text!r}") from None
        comps.append((w, mu, sd))
    return tuple(comps)


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _add_method_args(p, image=False):
    p.add_argument("--method", required=True, choices=quantizers.METHODS)
    p.add_argument("--lambda1", type=float)
    p.add_argument("--lambda2", type=float, default=0.0)
    p.add_argument("--l", type=int, dest="target_l", help="number of output levels")
    p.add_argument("--seed", type=int, help=f"k-means seed (default ${SEED_ENV} or 0)")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--weighted", action="store_true",
                   help="weight distinct values by their multiplicity")
    p.add_argument("--no-refit", dest="refit", action="store_false",
                   help="skip the least-squares refit for l1_l2")
    p.add_argument("--lambda0", type=float)
    p.add_argument("--delta-lambda", type=float)
    p.add_argument("--max-rounds", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-sweeps", type=int, default=10000)
    if not image:
        p.add_argument("--clamp", type=_pair, help="clamp output to 'a,b'")


def _request(args, clamp):
    seed = args.seed if args.seed is not None else _default_seed()
    try:
        return quantizers.QuantizeRequest(
            method=args.method, lambda1=args.lambda1, lambda2=args.lambda2,
            target_l=args.target_l, clamp=clamp, seed=seed, restarts=args.restarts,
            weighted=args.weighted, refit=args.refit, lambda0=args.lambda0,
            delta_lambda=args.delta_lambda, max_rounds=args.max_rounds,
            solver=SolverConfig(tolerance=args.tol, max_sweeps=args.max_sweeps),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _summary(q, w, elapsed):
    d = extract_distinct(w)
    return {
        "method": q.method, "distinct_count": q.distinct_count,
        "loss_full": l2_loss(w, q.data),
        "loss_distinct": l2_loss(d.values, q.distinct_levels),
        "wall_time_s": elapsed,
    }


def cmd_quantize(args):
    rows = read_csv_rows(args.input, header=args.header)
    if not rows:
        raise UsageError(f"{args.input}: no values")
    widths = {len(r) for r in rows}
    w = np.array([x for r in rows for x in r])
    q, elapsed = _timed(w, _request(args, args.clamp))
    out = q.data
    if len(widths) == 1 and widths.pop() > 1:
        out = restore_matrix(out, (len(rows), len(rows[0])))
    if args.output:
        write_csv(args.output, out)
    else:
        sys.stdout.write("\n".join("%.17g" % x for x in np.ravel(out)) + "\n")
    print(json.dumps(_summary(q, w, elapsed), sort_keys=True),
          file=sys.stderr if not args.output else sys.stdout)


def _timed(w, req):
    t0 = time.perf_counter()
    q = quantizers.quantize(w, req)
    return q, time.perf_counter() - t0


def cmd_image(args):
    img = read_pgm(args.input)
    req = _request(args, (0.0, 1.0))
    q, elapsed = _timed(img.pixels, req)
    write_pgm(args.output, ImageBuffer(img.width, img.height, q.data, img.max_val),
              binary=not args.ascii)
    print(json.dumps({**_summary(q, img.pixels, elapsed), "width": img.width,
                      "height": img.height}, sort_keys=True))


def cmd_gen(args):
    seed = args.seed if args.seed is not None else _default_seed()
    try:
        spec = DatasetSpec(kind=args.kind, n=args.n, range=args.range, seed=seed,
                           mog_components=args.mog, mean=args.mean, stddev=args.stddev)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if spec.kind in ("csv", "pgm"):
        raise UsageError("gen only draws synthetic kinds: mog, uniform, gaussian")
    data = generate(spec)
    if args.output:
        write_csv(args.output, data)
    else:
        sys.stdout.write("".join("%.17g\n" % x for x in data))


def cmd_bench(args):
    with open(args.config, encoding="utf-8") as fh:
        spec = json.load(fh)
    if args.seed is not None:
        spec["seed"] = args.seed
    elif "seed" not in spec:
        spec["seed"] = _default_seed()
    report = run_bench(spec, command=["bench", os.path.basename(args.config)])
    if args.output:
        report.write(args.output, args.csv)
    else:
        sys.stdout.write(report.to_jsonl())
        if args.csv:
            with atomic_write(args.csv) as fh:
                fh.write(report.to_csv())
    failed = sum(1 for r in report.rows if r["error"])
    print(f"{len(report.rows)} rows, {failed} failed", file=sys.stderr)


def cmd_oracle(args):
    w = np.array([x for r in read_csv_rows(args.input, header=args.header) for x in r])
    d = extract_distinct(w)
    if not 1 <= args.target_l <= d.m:
        raise UsageError(f"--l must be in [1, {d.m}]")
    weights = d.counts() if args.weighted else None
    sol = solve_l0_dp(d.values, args.target_l, weights)
    out = {"m": d.m, "l": args.target_l, "boundaries": sol.boundaries.tolist(),
           "levels": sol.levels.tolist(), "sse": sol.sse}
    if args.exhaustive:
        if d.m > args.max_exhaustive:
            raise UsageError(f"exhaustive search limited to m <= {args.max_exhaustive}")
        sse, bounds = exhaustive_l0(d.values, args.target_l, weights)
        out["exhaustive_sse"] = sse
        out["exhaustive_boundaries"] = bounds.tolist()
    print(json.dumps(out, sort_keys=True))


def build_parser():
    parser = argparse.ArgumentParser(prog="sparsevq", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("quantize", help="quantize a CSV vector or matrix")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--header", action="store_true", help="skip the first line")
    _add_method_args(p)
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("image", help="quantize a PGM image (output clamped to [0, 1])")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--ascii", action="store_true", help="write P2 instead of P5")
    _add_method_args(p, image=True)
    p.set_defaults(func=cmd_image)

    p = sub.add_parser("gen", help="draw a seeded synthetic dataset as CSV")
    p.add_argument("--kind", required=True, choices=("mog", "uniform", "gaussian"))
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--range", type=_pair, default=(0.0, 100.0))
    p.add_argument("--seed", type=int)
    p.add_argument("--mog", type=_mog, help="mixture as 'weight:mean:sd;...'")
    p.add_argument("--mean", type=float)
    p.add_argument("--stddev", type=float)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run a JSON-described sweep")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="JSON-lines report path")
    p.add_argument("--csv", help="also write a CSV mirror here")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle", help="exact optimal l-level quantization of a CSV vector")
    p.add_argument("input")
    p.add_argument("--l", type=int, dest="target_l", required=True)
    p.add_argument("--exhaustive", action="store_true",
                   help="also brute-force every contiguous split")
    p.add_argument("--max-exhaustive", type=int, default=20)
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--header", action="store_true")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"sparsevq {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        # missing files, unreadable input, bad parameters
        print(f"sparsevq {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"sparsevq {args.command}: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
