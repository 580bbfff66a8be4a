#!/usr/bin/env python3
"""
Command-line entry point for the fairgap experiments.

    python fairgap_cli.py verify --config experiment_config.json --jobs 4
    python fairgap_cli.py train --config configs/adult.json --surrogate hinge --seed 3
"""
import argparse
import logging
import os
import sys

from fairgap.errors import EXIT_OK, EXIT_USAGE, FairgapError, exit_code_for
from fairgap.experiments import COMMANDS, ExperimentConfig
from fairgap.reporting import safe_json_dumps

logger = logging.getLogger("fairgap")


def configure_logging(verbose: bool = False) -> None:
    level = "DEBUG" if verbose else os.environ.get("FAIRGAP_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s - %(levelname)s - %(message)s",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Fairness-surrogate experiments and verification.")
    parser.add_argument("command", choices=sorted(COMMANDS), help="Experiment to run")
    parser.add_argument("--config", default=None, help="Experiment config JSON (defaults apply when omitted)")
    parser.add_argument("--out", default=None, help="Output directory or fsspec URL (overrides output_dir)")
    parser.add_argument("--seed", type=int, default=None, help="Run a single seed")
    parser.add_argument("--surrogate", default=None, help="Run a single surrogate, e.g. hinge or general-sigmoid:w=4")
    parser.add_argument("--rho", type=float, default=None, help="Use a single penalty weight")
    parser.add_argument("--mode", choices=["absolute", "squared", "signed"], default=None, help="Penalty mode")
    parser.add_argument("--jobs", type=int, default=None, help="Worker threads for independent cells")
    parser.add_argument("--verbose", action="store_true", help="Debug logging")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    configure_logging(args.verbose)
    try:
        cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
        cfg = cfg.with_overrides(seed=args.seed, surrogate=args.surrogate, rho=args.rho,
                                 mode=args.mode, jobs=args.jobs, out=args.out)
    except FairgapError as e:
        logger.error(f"❌ {e}")
        return exit_code_for(e)

    result = COMMANDS[args.command](cfg)
    print(safe_json_dumps(result, indent=2))
    if result.get("status") == "success":
        logger.info(f"✅ {args.command} finished")
        return EXIT_OK
    return int(result.get("exit_code", EXIT_USAGE))


if __name__ == "__main__":
    sys.exit(main())
