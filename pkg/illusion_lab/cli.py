"""Command-line entry point: `illusion-lab <kind> --config FILE`"""
import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .config import Config
from .data_loader import load_experiment_config
from .exceptions import ConfigurationError, IllusionLabError, IngestionError
from .logging_config import configure_logging
from .orchestrator import ExperimentRunner
from .results import RESULT_FORMATS, render_results, write_results
from .schemas import EXPERIMENT_KINDS

logger = logging.getLogger(__name__)

VALIDATE = 'validate-config'


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, required=True, help="Experiment recipe (INI)")
    parser.add_argument("--quiet", action="store_true", help="Only log warnings and errors")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="illusion-lab",
        description="Reproduce classifier-performance experiments from declarative recipes",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for kind in EXPERIMENT_KINDS:
        sub = subparsers.add_parser(kind, help=f"Run a {kind} experiment")
        _add_common(sub)
        sub.add_argument("--seed", type=int, default=None, help="Override the recipe seed")
        sub.add_argument("--out", type=str, default=None, help="Result CSV path (default: recipe output_path, else stdout)")
        sub.add_argument("--format", choices=RESULT_FORMATS, default="csv",
                         help="csv writes metadata comments, plain omits them")
    _add_common(subparsers.add_parser(VALIDATE, help="Check a recipe without running it"))
    return parser


def run(args: argparse.Namespace) -> int:
    config = load_experiment_config(
        args.config,
        seed=getattr(args, 'seed', None),
        output_path=getattr(args, 'out', None),
    )
    if args.command == VALIDATE:
        logger.info(f"{args.config}: valid {config.kind} recipe")
        return Config.EXIT_OK
    if config.kind != args.command:
        raise ConfigurationError(f"{args.config} describes a {config.kind} experiment, not {args.command}")

    runner = ExperimentRunner(config)
    table = asyncio.run(runner.run())
    if config.output_path:
        Path(config.output_path).parent.mkdir(parents=True, exist_ok=True)
        path = write_results(table, config.output_path, args.format)
        if not args.quiet:
            runner.print_summary(table)
        logger.info(f"Results saved to: {path}")
    else:
        sys.stdout.write(render_results(table, args.format))
    return Config.EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(quiet=args.quiet)
    try:
        return run(args)
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        return Config.EXIT_CONFIGURATION
    except IngestionError as e:
        logger.error(f"Ingestion error: {e}")
        return Config.EXIT_INGESTION
    except (IllusionLabError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return Config.EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
