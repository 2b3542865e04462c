"""Command line entry point.

    raysim run <config> [--seed S] [--threads T] [--out PATH]
    raysim validate <config>
    raysim list-experiments

Configurations are flat ``key = value`` text files; ``raysim validate`` echoes
the fully-resolved configuration including every default that was applied.
The RAYSIM_THREADS environment variable sets the default worker count.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys

from .experiments import (
    _TABLE_HEADER,
    EXPERIMENTS,
    ConfigError,
    parse_config_text,
    run_experiment,
    validate_config,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="raysim", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write its result table")
    run.add_argument("config", help="path to a key = value configuration file")
    run.add_argument("--seed", type=int, default=None, help="override the configured seed")
    run.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get("RAYSIM_THREADS", "1")),
        help="worker threads over realizations (default: RAYSIM_THREADS or 1)",
    )
    run.add_argument("--out", default=None, help="override the configured output path")

    val = sub.add_parser("validate", help="validate a configuration and echo defaults")
    val.add_argument("config", help="path to a key = value configuration file")

    sub.add_parser("list-experiments", help="list available experiment ids")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stdout, level=logging.INFO, format="%(message)s")
    logging.raiseExceptions = False  # a closed stdout pipe is not our error
    try:
        return _dispatch(args)
    except BrokenPipeError:
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 141


def _dispatch(args) -> int:

    if args.command == "list-experiments":
        for name, description in EXPERIMENTS.items():
            print(f"{name}: {description}")
        return 0

    try:
        config = validate_config(args.config)
    except ConfigError as err:
        print("invalid configuration:", file=sys.stderr)
        for violation in err.violations:
            print(f"  - {violation}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"cannot read configuration: {err}", file=sys.stderr)
        return 2

    if args.command == "validate":
        with open(args.config) as fh:
            explicit = set(parse_config_text(fh.read()))
        print("configuration OK:")
        for field in dataclasses.fields(config):
            provenance = "" if field.name in explicit else "  (default applied)"
            print(f"  {field.name} = {getattr(config, field.name)}{provenance}")
        return 0

    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    if args.out is not None:
        config = dataclasses.replace(config, output=args.out)
    if args.threads < 1:
        print("--threads must be at least 1", file=sys.stderr)
        return 2

    try:
        rows = run_experiment(config, threads=args.threads)
    except Exception as err:  # enumeration caps, solver non-convergence, I/O
        print(f"experiment failed: {err}", file=sys.stderr)
        return 1

    if config.output is None:
        _print_rows(rows)
    else:
        print(f"wrote {len(rows)} rows to {config.output}")
    return 0


def _print_rows(rows) -> None:
    print(_TABLE_HEADER)
    for r in rows:
        print(
            f"{r.x_value:.12g}\t{r.metric}\t{r.mean:.12g}\t{r.stderr:.12g}\t"
            f"{r.architecture}\t{r.pattern}\t{r.realizations}\t{r.seed}"
        )


if __name__ == "__main__":
    sys.exit(main())
