"""Command-line front end.

Exit codes: 0 all analyses/checks passed, 2 an analysis failed or reported a
defect, 3 the configuration was invalid.
"""
from __future__ import annotations

import argparse
import sys

from . import analysis, config
from .errors import ConfigError, UnitraceError


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="unitrace",
        description="Trace and K-theory invariants of unitary-group homomorphisms "
        "between finite-dimensional algebras.",
    )
    p.add_argument("--config", metavar="PATH", help="analysis configuration file")
    p.add_argument("--corpus", action="store_true", help="run the built-in golden examples")
    p.add_argument("--properties", action="store_true", help="run randomized property sweeps")
    p.add_argument("--seed", type=int, default=None, help="override the random seed")
    p.add_argument("--trials", type=int, default=None, help="override the trial count")
    p.add_argument("--tol", type=float, default=None, help="override the tolerance")
    p.add_argument(
        "--format", choices=("text", "json"), default="text", help="output format"
    )
    return p


def _emit(report: analysis.Report, fmt: str, out) -> int:
    out.write(report.to_json() if fmt == "json" else report.to_text())
    return 0 if report.status == "ok" else 2


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    modes = sum(bool(x) for x in (args.config, args.corpus, args.properties))
    if modes != 1:
        print("exactly one of --config, --corpus, --properties is required", file=sys.stderr)
        return 3
    try:
        if args.corpus:
            report = analysis.run_corpus(tol=args.tol if args.tol is not None else 1e-9)
        elif args.properties:
            report = analysis.run_properties(
                seed=args.seed if args.seed is not None else 0,
                trials=args.trials if args.trials is not None else 50,
            )
        else:
            overrides = {"seed": args.seed, "trials": args.trials, "tol": args.tol}
            overrides = {k: str(v) for k, v in overrides.items() if v is not None}
            cfg = config.load_config(args.config, overrides)
            report = analysis.run_analysis(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except UnitraceError as exc:
        print(f"analysis error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return _emit(report, args.format, sys.stdout)


if __name__ == "__main__":
    sys.exit(main())
