import argparse
import logging
import sys

from pydantic import ValidationError

from app.shared.exceptions import SpoisonError

from .commands import cmd_evolve, cmd_fibering, cmd_groundstate, cmd_profile_check, cmd_verify
from .config import load_config
from .output import error_record

logger = logging.getLogger(__name__)

COMMANDS = {
    "groundstate": cmd_groundstate,
    "evolve": cmd_evolve,
    "fibering": cmd_fibering,
    "verify": cmd_verify,
    "profile-check": cmd_profile_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spoison",
        description="Schrodinger-Poisson ground states, fibering maps and blow-up experiments",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub = subparsers.add_parser(name)
        sub.add_argument("--config", required=True, help="Experiment TOML file")
        sub.add_argument("--out", default=None, help="Output directory, overrides output_dir")
        sub.add_argument("--seed", type=int, default=None, help="Random seed, overrides seed")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logger.info(f"=== {args.command} ===")
    try:
        config = load_config(args.config, out=args.out, seed=args.seed)
        return COMMANDS[args.command](config)
    except (SpoisonError, ValidationError) as e:
        logger.error(f"[{args.command}] {type(e).__name__}: {e}")
        print(error_record(e), file=sys.stderr)
        return 2
