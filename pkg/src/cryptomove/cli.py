"""Command line entry points for running experiments.

`cryptomove run --config experiment.yaml` executes the whole pipeline; each
stage also has its own subcommand (`cryptomove tune --config ...`) so a run
can be resumed or a single stage re-executed while debugging. Exit codes:
0 success, 2 config error, 3 data error, 4 training error, 5 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .errors import EXIT_IO, EXIT_OK, PipelineError
from .pipeline import STAGES, ExperimentConfig, RunResult, load_config, run_experiment

__all__ = ["ExperimentConfig", "RunResult", "load_config", "run_experiment", "main"]


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="experiment config file (YAML)")
    parser.add_argument("--workers", type=int, default=None, help="cap on tuning worker processes")
    parser.add_argument("--seed", type=int, default=None, help="override the config's base seed")
    parser.add_argument("--out", default=None, help="override the config's output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cryptomove",
        description="Predict next-bar price movements from technical and social features.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full pipeline")
    _add_common_flags(run)
    run.add_argument("--stage", choices=STAGES, default=None, help="run only this stage")

    for name in STAGES:
        stage = sub.add_parser(name, help=f"run the {name} stage only")
        _add_common_flags(stage)
    return parser


def _effective_config(args: argparse.Namespace) -> ExperimentConfig:
    config = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out"] = args.out
    if args.workers is not None:
        overrides["workers"] = args.workers
    # replace() re-runs the config invariants, so a bad override fails the
    # same way a bad file would.
    return replace(config, **overrides) if overrides else config


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    stage = args.command if args.command in STAGES else args.stage
    try:
        config = _effective_config(args)
        result = run_experiment(config, stage=stage)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in result.artifacts:
        print(f"wrote {path}")
    return EXIT_OK
