"""Command-line entry point: ``neuro-aging-sim <command> [options]``."""

import argparse
import logging
import sys
from typing import List, Optional

from ..common.utils import setup_logger
from ..policy.models import PolicyKind
from .api import cmd_calibrate, cmd_compare, cmd_gen, cmd_run, cmd_stats, cmd_sweep
from .utils import EXIT_USER_ERROR

logger = logging.getLogger("neuro_aging_sim")

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _policy_list(text: str) -> List[str]:
    names = [name.strip() for name in text.split(",") if name.strip()]
    valid = {kind.value for kind in PolicyKind}
    for name in names:
        if name not in valid:
            raise argparse.ArgumentTypeError(f"unknown policy '{name}' (choose from {', '.join(sorted(valid))})")
    return names


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neuro-aging-sim",
        description="Simulate BTI aging of a tiled neuromorphic chip under run-time reliability policies.",
    )
    parser.add_argument("--log-level", default="INFO", type=str.upper, choices=LOG_LEVELS, help="Log level.")
    parser.add_argument("--log-file", default=None, help="Also write the log to this file.")
    commands = parser.add_subparsers(dest="command", metavar="command", required=True)

    run = commands.add_parser("run", help="Run one experiment and write its reports.")
    run.add_argument("--config", required=True, help="Experiment config (TOML or JSON).")
    run.add_argument("--out", default=None, help="Output directory; overrides output_dir.")
    run.add_argument("--seed", type=int, default=None, help="Seed; overrides the config.")
    run.add_argument("--sample-trajectory", action="store_true", help="Also write per-spike aging samples.")

    compare = commands.add_parser("compare", help="Compare policies on the same trace and seed.")
    compare.add_argument("--config", required=True, help="Experiment config (TOML or JSON).")
    compare.add_argument(
        "--policies",
        type=_policy_list,
        default=[kind.value for kind in PolicyKind],
        help="Comma-separated policies (default: none,fixed_interval,dynamic).",
    )
    compare.add_argument("--out", default=None, help="Output directory; overrides output_dir.")
    compare.add_argument("--seed", type=int, default=None, help="Seed; overrides the config.")
    compare.add_argument(
        "--match-budget",
        action="store_true",
        help="Give fixed_interval the mean de-stress interval the dynamic policy chose.",
    )

    gen = commands.add_parser("gen", help="Generate a Poisson spike trace.")
    gen.add_argument("--config", required=True, help="Poisson workload spec, or an experiment config.")
    gen.add_argument("--out", required=True, help="Trace file to write.")
    gen.add_argument("--seed", type=int, default=None, help="Seed; overrides the workload file.")

    calibrate = commands.add_parser("calibrate", help="Fit a_fit to the reference lifetime.")
    calibrate.add_argument("--config", required=True, help="Experiment config (TOML or JSON).")
    calibrate.add_argument("--out", default=None, help="Output directory; overrides output_dir.")

    stats = commands.add_parser("stats", help="Firing-rate statistics of a trace file.")
    stats.add_argument("--trace", required=True, help="Trace file.")
    stats.add_argument("--out", required=True, help="Output directory.")
    stats.add_argument("--window", type=float, default=1.0, help="Rate window in seconds (default: 1).")
    stats.add_argument("--bins", type=int, default=10, help="Histogram bins (default: 10).")

    sweep = commands.add_parser("sweep", help="Run the [sweep] grid of an experiment config.")
    sweep.add_argument("--config", required=True, help="Experiment config (TOML or JSON).")
    sweep.add_argument("--out", default=None, help="Output directory; overrides output_dir.")
    sweep.add_argument("--workers", type=int, default=None, help="Worker processes; 0 uses every core.")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors and 0 on --help.
        return int(exc.code or 0)

    try:
        setup_logger(args.log_level, args.log_file)
    except OSError as exc:
        print(f"Error: cannot open log file: {exc}", file=sys.stderr)
        return EXIT_USER_ERROR

    if args.command == "run":
        return cmd_run(args.config, args.out, args.seed, args.sample_trajectory)
    if args.command == "compare":
        return cmd_compare(args.config, args.policies, args.out, args.seed, args.match_budget)
    if args.command == "gen":
        return cmd_gen(args.config, args.out, args.seed)
    if args.command == "calibrate":
        return cmd_calibrate(args.config, args.out)
    if args.command == "stats":
        return cmd_stats(args.trace, args.out, args.window, args.bins)
    return cmd_sweep(args.config, args.out, args.workers)


if __name__ == "__main__":
    sys.exit(main())
