"""Command-line entry point.

    carleson run <scenario> [--config <path>] [--out <dir>] [--seed <u64>]
                 [--threads <n>] [--format csv,json,gnuplot-data] [--no-figures]
    carleson list

Exit codes: 0 success, 1 acceptance-check failure (report still written),
2 invalid configuration, 3 solver failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, ScenarioConfig, load_config
from .reporting import emit
from .scenarios import SCENARIOS, run
from .solver import SolverFailure

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_CONFIG = 2
EXIT_SOLVER_FAILURE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carleson",
        description="Multiscale verification runs for elliptic solutions on the half-space",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and write its report")
    p_run.add_argument("scenario", choices=sorted(SCENARIOS))
    p_run.add_argument("--config", help="flat key=value config file")
    p_run.add_argument("--out", help="output directory (default out/<scenario>)")
    p_run.add_argument("--seed", type=int, help="seed override for randomized fields")
    p_run.add_argument("--threads", type=int, help="worker threads for net sweeps")
    p_run.add_argument("--format", default="csv,json",
                       help="comma-separated output formats (csv,json,gnuplot-data)")
    p_run.add_argument("--no-figures", action="store_true",
                       help="skip rendering PNG figures")

    sub.add_parser("list", help="list scenarios with what each one verifies")
    return parser


def _config_for(args) -> ScenarioConfig:
    raw = load_config(args.config) if args.config else {}
    cfg = ScenarioConfig.from_raw(args.scenario, raw)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.threads is not None:
        cfg.threads = args.threads
    if args.out is not None:
        cfg.out_dir = args.out
    elif "out" not in raw:
        cfg.out_dir = str(Path("out") / args.scenario)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        width = max(len(name) for name in SCENARIOS)
        for name in sorted(SCENARIOS):
            print(f"{name:<{width}}  {SCENARIOS[name][1]}")
        return EXIT_OK

    try:
        cfg = _config_for(args)
        formats = tuple(tok.strip() for tok in args.format.split(",") if tok.strip())
        report = run(args.scenario, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER_FAILURE

    written = emit(report, cfg.out_dir, formats=formats, render=not args.no_figures)
    for kind, path in sorted(written.items()):
        print(f"wrote {kind}: {path}")
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"[{status}] {check.name}: value={check.value:.6g} bound={check.bound:.6g}")
    if not report.passed:
        print("one or more checks failed", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
