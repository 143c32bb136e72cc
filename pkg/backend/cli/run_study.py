"""cli/run_study.py — CLI entry point for every experiment.

Usage
-----
    cd backend
    python -m cli.run_study weights-check --n-grid 100,400,1600 --reps 1000
    python -m cli.run_study clt --paradigm on-data --statistic t_star_star --m-rule nlogn:4 --n 200
    python -m cli.run_study interval --data ../data/sample.csv --kind 2 --B 399
    python -m cli.run_study coverage --kind 1 --n 1000 --B 399 --reps 500 --threads 4
    python -m cli.run_study fixed-n --config experiments.ini

Exit codes: 0 success, 2 configuration error, 3 experiment degeneracy,
4 I/O error, 1 internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

# Ensure 'backend/' is on sys.path when invoked as a script
sys.path.insert(0, str(Path(__file__).parent.parent))

from cli.commands import COMMANDS
from cli.config_file import load_config
from core.config import settings
from core.errors import BootstrapLabError
from core.logging import configure_logging

logger = logging.getLogger(__name__)

# flag dest -> config key, per subcommand
_SUBCOMMAND_FLAGS: dict[str, list[str]] = {
    "weights-check": ["n_grid", "reps"],
    "clt": ["paradigm", "statistic", "n", "inner_reps", "outer_reps", "ks_threshold"],
    "negligibility": ["statistic", "n", "reps", "epsilon", "sigma_sq"],
    "interval": ["kind", "n", "B", "alpha", "reps", "data", "two_sided"],
    "coverage": ["kind", "n", "B", "alpha", "reps", "n_grid"],
    "fixed-n": ["n", "m_grid", "reps", "data"],
}

_COMMON_FLAGS = ["seed", "threads", "out", "format", "scheme", "m_rule", "law", "generator", "csv_header"]

_FLAG_SPECS: dict[str, dict] = {
    "seed": dict(type=int, help="Root seed (unsigned 64-bit)."),
    "threads": dict(type=int, help="Worker threads (default BOOT_T_THREADS)."),
    "out": dict(help="Result file path."),
    "format": dict(choices=["csv", "json"], help="Result file format."),
    "scheme": dict(choices=["efron", "gamma", "custom-positive"], help="Bootstrap weight scheme."),
    "m_rule": dict(help="Efron m_n rule: fixed:M | ratio:C | big-ratio:C | nlogn:C | square-root-cap:C."),
    "law": dict(help="Positive weight law for custom-positive: gamma:SHAPE,RATE | exp | const:C."),
    "generator": dict(help="Data law: normal[:MU,SIGMA] | exp-centered[:LAMBDA] | t:NU | two-point[:LO,HI,P] | csv:PATH."),
    "csv_header": dict(action=argparse.BooleanOptionalAction, help="CSV has a header row (default: auto-detect)."),
    "n_grid": dict(help="Comma-separated sample sizes."),
    "m_grid": dict(help="Comma-separated bootstrap sizes."),
    "reps": dict(type=int, help="Replicates / repetitions / draws."),
    "paradigm": dict(choices=["on-weights", "on-data"], help="Conditioning paradigm."),
    "statistic": dict(help="t_star | t_star_star | t_star_star_sn."),
    "n": dict(type=int, help="Sample size."),
    "inner_reps": dict(type=int, help="Conditional replicates per realization."),
    "outer_reps": dict(type=int, help="Fixed realizations."),
    "ks_threshold": dict(type=float, help="KS threshold for the 2x exceedance fraction."),
    "epsilon": dict(help="Comma-separated epsilon grid."),
    "sigma_sq": dict(type=float, help="Variance proxy for the variance-ratio probe."),
    "kind": dict(type=int, choices=[1, 2, 3, 4], help="Statistic kind (1-3 Efron, 4 i.i.d.-positive)."),
    "B": dict(type=int, help="Bootstrap replicates per bound."),
    "alpha": dict(type=float, help="Nominal level in (0, 1)."),
    "data": dict(help="CSV dataset (first column)."),
    "two_sided": dict(action=argparse.BooleanOptionalAction, help="Also emit the two-sided interval."),
}


def _add_flag(parser: argparse.ArgumentParser, dest: str) -> None:
    flag = "--" + dest.replace("_", "-")
    parser.add_argument(flag, dest=dest, default=None, **_FLAG_SPECS[dest])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Weighted-bootstrap t-statistic experiments.")
    parser.add_argument("--log-level", default=None, help="Override BOOT_T_LOG_LEVEL.")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, flags in _SUBCOMMAND_FLAGS.items():
        p = sub.add_parser(command)
        p.add_argument("--config", default=None, help="Sectioned key-value config file.")
        for dest in _COMMON_FLAGS + flags:
            _add_flag(p, dest)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level or settings.log_level, settings.log_file or None)

    overrides = {
        dest: getattr(args, dest)
        for dest in _COMMON_FLAGS + _SUBCOMMAND_FLAGS[args.command]
        if getattr(args, dest) is not None
    }
    try:
        config = load_config(args.command, args.config, overrides)
        paths = COMMANDS[args.command](config)
    except BootstrapLabError as exc:
        logger.error(
            "run failed",
            extra={"command": args.command, "error": type(exc).__name__, "field": getattr(exc, "field", None)},
        )
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        logger.error("run failed", extra={"command": args.command, "error": type(exc).__name__})
        print(f"error: {exc}", file=sys.stderr)
        return 4

    print("\n" + "=" * 50)
    print(f"Command : {args.command}")
    print(f"Seed    : {config.seed}")
    for path in paths:
        print(f"Wrote   : {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
