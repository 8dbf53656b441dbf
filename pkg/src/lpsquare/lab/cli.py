"""Command line entry point: ``lpsquare <subcommand> [--config cfg.json] [--seed N] [--out path] [--format fmt]``."""

from __future__ import annotations

import argparse
import json
import sys

from .config import ConfigError, ExperimentConfig
from .emit import FORMATS, UnsupportedFormat, emit, load_report
from .experiments import run

SUBCOMMANDS = ("counterexample", "boundedness", "tile-audit", "square", "report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpsquare", description="Square-function laboratory on the discrete torus.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        if name == "report":
            p.add_argument("input", help="JSON report written by an earlier run")
        p.add_argument("--config", help="JSON experiment configuration")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=FORMATS)
    return parser


def _config(args) -> ExperimentConfig:
    d = {}
    if args.config:
        with open(args.config) as fh:
            d = json.load(fh)
    d["kind"] = args.command
    if args.seed is not None:
        d["seed"] = args.seed
    if args.format is not None:
        d["format"] = args.format
    if args.command == "counterexample" and "exponents" not in d:
        d.setdefault("samples", 4096)
        d["exponents"] = [[1.25, 4.0], [1.5, 4.0], [2.0, 4.0], [4.0, 4.0, 2.0]]
    return ExperimentConfig.from_dict(d)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            report = load_report(args.input)
            fmt = args.format or "json"
        else:
            cfg = _config(args)
            report = run(cfg)
            fmt = cfg.format
        text = emit(report, fmt, args.out)
    except (ConfigError, UnsupportedFormat) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out is None:
        sys.stdout.write(text)
    for name, ok in report.checks.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}", file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
