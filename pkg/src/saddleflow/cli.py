"""Command-line runner: ``saddleflow run | plot | rate``.

Exit codes: 0 success, 2 invalid config or input files, 3 reference oracle
failure, 4 integration blow-up (the partial trajectory is still written).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .config import ConfigError, load_config
from .graph import GraphGenerationError
from .experiments import (FIT_WINDOW, TrajectoryRecord, build_experiment, cached_reference,
                          run_experiment, write_results)
from .oracle import OracleError, fit_window
from .plotting import loglog_svg

EXIT_OK, EXIT_CONFIG, EXIT_ORACLE, EXIT_BLOWUP = 0, 2, 3, 4


def _err(msg: str) -> None:
    print(f"saddleflow: {msg}", file=sys.stderr)


def cmd_run(args) -> int:
    try:
        config = load_config(args.config)
        exp = build_experiment(config)
    except (ConfigError, ValueError, GraphGenerationError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    outdir = args.output or config.get("output") or os.path.splitext(args.config)[0] + "_out"
    os.makedirs(outdir, exist_ok=True)
    try:
        ref = cached_reference(exp, os.path.join(outdir, "reference.json"))
    except OracleError as exc:
        _err(f"reference oracle failed: {exc}")
        return EXIT_ORACLE
    records = run_experiment(exp, ref, workers=args.workers)
    summary = write_results(exp, ref, records, outdir)
    failed = [m for m, r in records.items() if r.error]
    for m in failed:
        _err(f"{m} flow stopped early ({records[m].error}); partial CSV written")
    if not args.quiet:
        print(json.dumps({k: summary[k] for k in summary if k.startswith("slope_")}))
    return EXIT_BLOWUP if failed else EXIT_OK


def cmd_plot(args) -> int:
    curves = []
    try:
        for path in args.csv:
            rec = TrajectoryRecord.from_csv(path)
            if args.column not in rec.columns or rec.times.shape[0] < 2:
                raise ValueError(f"{path}: needs columns t and {args.column} with data")
            curves.append((rec.method, rec.times, rec.columns[args.column]))
        svg = loglog_svg(curves, column=args.column)
    except (OSError, ValueError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    with open(args.output, "w") as fh:
        fh.write(svg)
    return EXIT_OK


def cmd_rate(args) -> int:
    try:
        rec = TrajectoryRecord.from_csv(args.csv)
        if args.column not in rec.columns:
            raise ValueError(f"{args.csv}: no column {args.column!r}")
        t_end = args.t_end if args.t_end is not None else float(rec.times[-1])
        slope, intercept, r2 = fit_window(rec.times, np.abs(rec.columns[args.column]),
                                          t_end, args.span)
    except (OSError, ValueError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    print(json.dumps({"column": args.column, "slope": slope, "intercept": intercept,
                      "r_squared": r2, "window": [t_end / args.span, t_end]}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="saddleflow",
                                     description="Accelerated saddle-point flow experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    run.add_argument("-o", "--output", help="output directory (overrides the config)")
    run.add_argument("--workers", type=int, default=2, help="flows integrated concurrently")
    run.add_argument("-q", "--quiet", action="store_true")
    run.set_defaults(func=cmd_run)

    plot = sub.add_parser("plot", help="log-log SVG of one column from trajectory CSVs")
    plot.add_argument("csv", nargs="+")
    plot.add_argument("-o", "--output", required=True)
    plot.add_argument("--column", default="gap")
    plot.set_defaults(func=cmd_plot)

    rate = sub.add_parser("rate", help="fit a log-log slope to one CSV column")
    rate.add_argument("csv")
    rate.add_argument("--column", default="gap")
    rate.add_argument("--t-end", type=float, default=None)
    rate.add_argument("--span", type=float, default=FIT_WINDOW)
    rate.set_defaults(func=cmd_rate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
