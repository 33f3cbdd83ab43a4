"""Command-line entry points: ``trpca fit``, ``trpca sweep``, ``trpca bgsub``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .core import DEFAULT_EPS, DEFAULT_MAX_ITER, DEFAULT_RESTARTS, TrimmedObjectiveSpec, trpca_multistart
from .datagen import GeneratorParams
from .errors import DataError, DimensionError, NumericError
from .evaluation import METHODS, run_sweep, split_background
from .io import load_csv, load_frames, write_bgsub, write_fit, write_sweep
from .pca import pca_fit

log = logging.getLogger("trpca")

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

# default outlier scales per generator
DEFAULT_SIGMA_O = {"data1": 2.0, "data2": 0.35}


def _float_list(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _method_list(text: str) -> list:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown method(s) {bad}; choose from {list(METHODS)}")
    return methods


def _add_fit_options(p: argparse.ArgumentParser):
    p.add_argument("--k", type=int, required=True, help="subspace dimension")
    p.add_argument("--t", type=int, default=None, help="rows retained (default ceil(n/2))")
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", choices=["random", "elemental"], default="random",
                   help="restart starting points (median + random frame, or row subsets)")
    p.add_argument("--jobs", type=int, default=1, help="threads for restarts/sweep cells")
    p.add_argument("--out", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trpca", description="Robust PCA by trimmed reconstruction error.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a subspace to a CSV matrix (rows = observations)")
    p_fit.add_argument("--input", required=True)
    p_fit.add_argument("--method", choices=["trpca", "pca"], default="trpca")
    _add_fit_options(p_fit)

    p_sweep = sub.add_parser("sweep", help="tre over a grid of outlier fractions on synthetic data")
    p_sweep.add_argument("--generator", choices=["data1", "data2"], default="data1")
    p_sweep.add_argument("--grid-lambda", type=_float_list, default=[0.1, 0.2, 0.3, 0.4, 0.45])
    p_sweep.add_argument("--reps", type=int, default=5)
    p_sweep.add_argument("--method", type=_method_list, default=list(METHODS),
                         help="comma-separated subset of " + ",".join(METHODS))
    p_sweep.add_argument("--n", type=int, default=200)
    p_sweep.add_argument("--p", type=int, default=100)
    p_sweep.add_argument("--sigma-t", type=float, default=0.05)
    p_sweep.add_argument("--sigma-o", type=float, default=None,
                         help="outlier scale (default 2 for data1, 0.35 for data2)")
    _add_fit_options(p_sweep)

    p_bg = sub.add_parser("bgsub", help="background subtraction on a PGM frame sequence")
    p_bg.add_argument("--frames", nargs="+", required=True, help="directory of .pgm files or file list")
    p_bg.add_argument("--method", choices=["trpca", "pca"], default="trpca")
    p_bg.add_argument("--dump-dir", default=None, help="write per-frame background/foreground PGMs here")
    _add_fit_options(p_bg)
    return parser


def _fit(X, args):
    if args.method == "pca":
        return pca_fit(X, args.k)
    return trpca_multistart(
        X,
        TrimmedObjectiveSpec(args.k, args.t),
        args.restarts,
        eps=args.eps,
        max_iter=args.max_iter,
        seed=args.seed,
        init=args.init,
        n_jobs=args.jobs,
    )


def _config(args) -> dict:
    return {key: value for key, value in sorted(vars(args).items()) if key != "verbose"}


def cmd_fit(args) -> int:
    X = load_csv(args.input)
    result = _fit(X, args)
    write_fit(result, args.out, _config(args))
    if args.method == "trpca":
        log.info("objective %.6g after %d iterations (%s)", result.objective, result.iterations, result.termination)
    return 0


def cmd_sweep(args) -> int:
    sigma_o = args.sigma_o if args.sigma_o is not None else DEFAULT_SIGMA_O[args.generator]
    base = GeneratorParams(n=args.n, p=args.p, k=args.k, sigma_T=args.sigma_t, sigma_o=sigma_o)
    result = run_sweep(
        args.generator,
        base,
        args.grid_lambda,
        methods=args.method,
        reps=args.reps,
        seed=args.seed,
        restarts=args.restarts,
        eps=args.eps,
        max_iter=args.max_iter,
        init=args.init,
        n_jobs=args.jobs,
    )
    write_sweep(result, args.out, _config(args))
    for row in result.rows:
        # reports clamp rounding-level negatives; the CSV keeps raw values
        log.info("lambda=%.3g %-16s tre=%.4g +- %.2g", row.lam, row.method, max(row.mean_tre, 0.0), row.std_tre)
    return 0


def cmd_bgsub(args) -> int:
    frames_arg = args.frames[0] if len(args.frames) == 1 else args.frames
    seq = load_frames(frames_arg)
    result = _fit(seq.data, args)
    model = result if args.method == "pca" else result.model
    split = split_background(seq.data, model)
    write_bgsub(split, args.out, _config(args), shape=(seq.height, seq.width), dump_dir=args.dump_dir)
    return 0


COMMANDS = {"fit": cmd_fit, "sweep": cmd_sweep, "bgsub": cmd_bgsub}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except (DataError, DimensionError, ValueError) as exc:
        print(f"trpca: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"trpca: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
