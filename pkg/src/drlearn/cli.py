"""Command-line front end: ``drl run``, ``drl plotdata``, ``drl cv``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .experiment import emit_plot_data, load_experiment_config, run_experiment


def _apply_overrides(config, args):
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    if getattr(args, "out", None):
        config.output_dir = args.out
    if getattr(args, "method", None):
        keep = [m for m in config.methods if m.label == args.method]
        if not keep:
            known = [m.label for m in config.methods]
            raise SystemExit(f"no method labelled {args.method!r} in config (have {known})")
        config.methods = keep
    if getattr(args, "rho", None) is not None:
        for method in config.methods:
            if method.optimizer is not None:
                method.optimizer = replace(method.optimizer, rho=args.rho)
    return config


def _cmd_run(args) -> int:
    config = _apply_overrides(load_experiment_config(args.config), args)
    result = run_experiment(config)
    for run in result.runs:
        status = f"FAILED: {run.error}" if run.error else f"misclassification {run.final_misclassification:.4f}"
        print(f"{run.method} seed={run.seed}: {status}")
    print(f"summary: {result.summary_path}")
    if result.failures:
        print(f"{len(result.failures)} of {len(result.runs)} runs failed", file=sys.stderr)
    return 1 if len(result.failures) == len(result.runs) else 0


def _cmd_cv(args) -> int:
    config = _apply_overrides(load_experiment_config(args.config), args)
    config.methods = [m for m in config.methods if m.kind == "cv"]
    if not config.methods:
        raise SystemExit("config has no [method.*] section with kind = cv")
    result = run_experiment(config)
    for run in result.runs:
        status = f"FAILED: {run.error}" if run.error else f"misclassification {run.final_misclassification:.4f}"
        print(f"{run.method} seed={run.seed}: {status}")
    print(f"summary: {result.summary_path}")
    return 1 if len(result.failures) == len(result.runs) else 0


def _cmd_plotdata(args) -> int:
    trace_dir = Path(args.dir)
    out = args.out or str(trace_dir / "plot_data.csv")
    paths = sorted(trace_dir.glob("trace_*.csv"))
    if not paths:
        print(f"no trace files in {trace_dir}", file=sys.stderr)
        return 1
    n_rows, missing = emit_plot_data(paths, out)
    print(f"wrote {n_rows} rows to {out}")
    for path in missing:
        print(f"skipped {path}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drl",
        description="Train and benchmark distributionally robust linear classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run all methods in an experiment config")
    run.add_argument("config", help="INI experiment description")
    run.add_argument("--seed", type=int, help="override the base seed")
    run.add_argument("--out", help="override the output directory")
    run.add_argument("--rho", type=float, help="override rho for every optimizer method")
    run.add_argument("--method", help="run only the method with this label")
    run.set_defaults(func=_cmd_run)

    plot = sub.add_parser("plotdata", help="merge run traces into one long-format CSV")
    plot.add_argument("dir", help="directory containing trace_*.csv files")
    plot.add_argument("--out", help="output CSV path (default: <dir>/plot_data.csv)")
    plot.set_defaults(func=_cmd_plotdata)

    cv = sub.add_parser("cv", help="run only the cross-validated ERM baseline methods")
    cv.add_argument("config", help="INI experiment description")
    cv.add_argument("--seed", type=int, help="override the base seed")
    cv.add_argument("--out", help="override the output directory")
    cv.set_defaults(func=_cmd_cv)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
