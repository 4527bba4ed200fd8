"""Command-line entry point: run an experiment config, or list and describe experiments."""

import argparse
import asyncio
import logging
import sys
from dataclasses import replace
from typing import List, Optional

import yaml

from .config import ExperimentConfig, ExperimentKind, RunnerConfig, set_config
from .parameter_schemas import get_schema, list_schemas
from .run_manager import RunManager

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logcorr-lab",
                                     description="Random-matrix and log-correlated field experiments")
    parser.add_argument("--runner-config", help="YAML file with a runner: section (default $LOGCORR_CONFIG)")
    parser.add_argument("--log-level", help="override LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="run an experiment config file")
    run.add_argument("config", help="experiment YAML file")
    run.add_argument("--seed", type=int, help="override the master seed")
    run.add_argument("--out", help="output directory for results.csv and manifest.json")
    run.add_argument("--threads", type=int, help="worker threads (default $LOGCORR_THREADS or all cores)")

    subparsers.add_parser("list-experiments", help="one line per experiment")

    describe = subparsers.add_parser("describe", help="parameters, defaults and CSV columns of one experiment")
    describe.add_argument("experiment")
    return parser


def _configure_logging(runner: RunnerConfig, override: Optional[str]) -> None:
    level_name = override or ("DEBUG" if runner.debug else runner.log_level)
    level = getattr(logging, level_name.upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    logging.getLogger().setLevel(level)


def _run(args: argparse.Namespace, runner: RunnerConfig) -> int:
    config = ExperimentConfig.load_from_file(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.out is not None:
        config = replace(config, output_path=args.out)

    manager = RunManager(runner)
    try:
        result = asyncio.run(manager.run(config))
        if not result["success"]:
            for message in result.get("errors") or [result["error"]]:
                print(f"Error: {message}", file=sys.stderr)
            return 1
        paths = manager.write_outputs(result["record"])
    finally:
        manager.close()
    print(paths["csv"])
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)
    try:
        runner = RunnerConfig.load_from_file(args.runner_config)
        if getattr(args, "threads", None) is not None:
            runner = replace(runner, threads=args.threads)
        set_config(runner)
        _configure_logging(runner, args.log_level)

        if args.command == "list-experiments":
            for schema in list_schemas():
                print(f"{schema.kind.value:<18} {schema.description}")
            return 0
        if args.command == "describe":
            print(get_schema(ExperimentKind.from_string(args.experiment)).describe())
            return 0
        return _run(args, runner)

    except (ValueError, OSError, yaml.YAMLError) as e:
        logger.error(f"logcorr-lab failed: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
