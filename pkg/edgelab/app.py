"""
edgelab command line.

    python app.py verify-bounds --out results --threads 4
    python app.py train-eval --set train.realizations=3 --set net.features=16
    python app.py sweep-hyper --set sweep.param=order --set sweep.values=1,2,3,4
    python app.py spectra --set spectra.pert_size=0.1
    python app.py ingest-movielens --ratings ml-100k/u.data

Exit codes: 0 success, 1 invalid input, 2 bound violation under --strict.
"""
import argparse
import logging
import os
import sys
from typing import Optional, Sequence

from dotenv import load_dotenv
from pydantic import ValidationError

from errors import BoundViolationError, InvalidInputError
from experiments import COMMANDS, load_config, run_command

logger = logging.getLogger("edgelab")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_VIOLATION = 2

DESCRIPTIONS = {
    "verify-bounds": "Monte-Carlo check of the stability bounds on SI, ES and general filter banks",
    "train-eval": "Train every filter class and score it on perturbed graphs",
    "sweep-hyper": "Accuracy under perturbation while one hyperparameter varies",
    "spectra": "Frequency responses on original and perturbed spectra",
    "ingest-movielens": "Build the movie graph and user dataset from a ratings file",
}


def configure_logging(quiet: bool = False):
    level = os.getenv("EDGELAB_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(
        level=logging.WARNING if quiet else level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--out", dest="out_dir", help="output directory (default: $EDGELAB_OUT_DIR or results)")
    common.add_argument("--seed", type=int, help="base seed of every random draw")
    common.add_argument("--threads", type=int, help="worker processes (default: $EDGELAB_THREADS or 1)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key, e.g. --set net.features=4 (repeatable)")
    common.add_argument("--quiet", action="store_true", help="only log warnings, hide progress bars")

    parser = argparse.ArgumentParser(description="EdgeNet stability laboratory",
                                     formatter_class=argparse.RawDescriptionHelpFormatter, epilog=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = commands.add_parser(command, parents=[common], help=DESCRIPTIONS[command],
                                  description=DESCRIPTIONS[command])
        if command == "verify-bounds":
            sub.add_argument("--strict", action="store_true", help="exit with code 2 on any bound violation")
        if command in ("train-eval", "sweep-hyper", "ingest-movielens"):
            sub.add_argument("--ratings", help="MovieLens ratings file (sets movielens.path)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    configure_logging(args.quiet)

    overrides = list(args.set)
    if getattr(args, "ratings", None):
        overrides.append(f"movielens.path={args.ratings}")
    try:
        config = load_config(
            args.command,
            args.config,
            overrides,
            seed=args.seed,
            out_dir=args.out_dir,
            threads=args.threads,
            quiet=args.quiet or None,
            strict=getattr(args, "strict", False) or None,
        )
        logger.info(f"[{config.command}] writing to {config.output_path}")
        run_command(config)
    except BoundViolationError as e:
        logger.error(f"[{args.command}] {e}")
        return EXIT_VIOLATION
    except (InvalidInputError, ValidationError) as e:
        logger.error(f"[{args.command}] invalid input: {e}")
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
