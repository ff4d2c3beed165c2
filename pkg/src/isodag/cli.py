"""Command line interface.

    isodag fit   --norm <p|inf|strict> --graph F --obs F --out F [options]
    isodag bench --family grid2d|random-regular --sizes 8,16 [options]

All errors are reported as one JSON diagnostic line on stderr with a
machine-readable code; missing input files exit with status 2, everything
else with 1.
"""

import argparse
import json
import sys
import time

import numpy as np

from .bench import BenchSpec, run_bench
from .errors import (
    CycleError,
    NegativeLengthError,
    ParseError,
    SelfLoopError,
    SolverFailure,
)
from .io import parse_instance
from .ipm import SolveReport, isotonic_ipm, long_step_ipm
from .reduction import isotonic_inf, isotonic_strict


def _build_parser():
    ap = argparse.ArgumentParser(prog="isodag")
    sub = ap.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit one instance from files")
    fit.add_argument("--norm", required=True,
                     help="p value (e.g. 2, 1.5), 'inf', or 'strict'")
    fit.add_argument("--variant", default="avg", choices=["avg", "min", "max"],
                     help="which l_inf solution (norm=inf only)")
    fit.add_argument("--delta", type=float, default=1e-6,
                     help="additive objective error target (p-norms)")
    fit.add_argument("--mode", default="short", choices=["short", "long"])
    fit.add_argument("--graph", required=True)
    fit.add_argument("--obs", required=True)
    fit.add_argument("--out", required=True, help="output JSON path, '-' for stdout")
    fit.add_argument("--seed", type=int, default=0)

    bench = sub.add_parser("bench", help="run a benchmark sweep, emit CSV")
    bench.add_argument("--family", required=True, choices=["grid2d", "random-regular"])
    bench.add_argument("--sizes", required=True,
                       help="comma-separated sizes (grid side lengths / vertex counts)")
    bench.add_argument("--sigma", type=float, default=1.0)
    bench.add_argument("--trials", type=int, default=3)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--norm", default="2")
    bench.add_argument("--mode", default="long", choices=["short", "long"])
    bench.add_argument("--degree", type=int, default=4)
    bench.add_argument("--rel-target", type=float, default=0.005)
    bench.add_argument("--delta", type=float, default=None)
    bench.add_argument("--out", required=True, help="output CSV path")
    return ap


_ERROR_CODES = [
    (FileNotFoundError, "E_IO", 2),
    (IsADirectoryError, "E_IO", 2),
    (PermissionError, "E_IO", 2),
    (OSError, "E_IO", 2),
    (ParseError, "E_PARSE", 1),
    (CycleError, "E_CYCLE", 1),
    (SelfLoopError, "E_SELFLOOP", 1),
    (NegativeLengthError, "E_LENGTH", 1),
    (SolverFailure, "E_SOLVER", 1),
    (ValueError, "E_ARGS", 1),
]


def _diagnose(exc):
    for etype, code, status in _ERROR_CODES:
        if isinstance(exc, etype):
            return code, status
    return "E_INTERNAL", 1


def _fit(args):
    dag, y, w = parse_instance(args.graph, args.obs)
    rng = np.random.default_rng(args.seed)
    if args.norm in ("inf", "strict"):
        t0 = time.perf_counter()
        if args.norm == "inf":
            x = isotonic_inf(dag, y, w, variant=args.variant, rng=rng)
        else:
            x = isotonic_strict(dag, y, w, rng=rng)
        err = float(np.max(w * np.abs(x - y)))
        report = SolveReport(x=x, objective=err, norm=args.norm, alpha_star=err,
                             wall_time_s=time.perf_counter() - t0,
                             mode=args.variant if args.norm == "inf" else None)
    else:
        p = float(args.norm)
        if args.mode == "long":
            report = long_step_ipm(dag, args.delta, y=y, w=w, p=p)
        else:
            report = isotonic_ipm(dag, args.delta, y=y, w=w, p=p)
    payload = json.dumps(report.to_json_dict(), indent=2)
    if args.out == "-":
        print(payload)
    else:
        with open(args.out, "w") as fh:
            fh.write(payload + "\n")
    return 0


def _bench(args):
    spec = BenchSpec(
        family=args.family,
        sizes=[int(s) for s in args.sizes.split(",")],
        sigma=args.sigma,
        trials=args.trials,
        seed=args.seed,
        norm=args.norm,
        mode=args.mode,
        degree=args.degree,
        rel_target=args.rel_target,
        delta=args.delta,
    )
    rows, summary = run_bench(spec, out_path=args.out)
    bad = [r for r in rows if r[-1] != "ok"]
    print(f"{len(rows) - len(bad)}/{len(rows)} trials ok -> {args.out}")
    return 0 if not bad else 1


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "fit":
            return _fit(args)
        return _bench(args)
    except Exception as exc:
        code, status = _diagnose(exc)
        print(json.dumps({"error": code, "message": str(exc)}), file=sys.stderr)
        return status


if __name__ == "__main__":
    sys.exit(main())
