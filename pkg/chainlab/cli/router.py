import argparse
import sys
from typing import List, Optional

from chainlab.cli.commands import approximation, chains, fixtures, gradient, modulus, poincare, space
from chainlab.cli.dependencies import ChainLabArgumentParser, add_global_options
from chainlab.core.config import settings
from chainlab.core.errors import UsageError
from chainlab.middleware.error_handler import handle_exception
from chainlab.middleware.logging import configure_logging, structured_run
from chainlab.services.run_service import RunService
from chainlab.utils.io import dumps

COMMAND_GROUPS = [space, gradient, modulus, poincare, approximation, chains, fixtures]


def build_parser() -> argparse.ArgumentParser:
    parser = ChainLabArgumentParser(
        prog="chainlab",
        description="Chain calculus on finite metric measure spaces",
    )
    add_global_options(parser)
    parser.add_argument("--config", help="run a saved RunConfig JSON instead of a subcommand")

    subparsers = parser.add_subparsers(dest="command")
    for group in COMMAND_GROUPS:
        group.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None and args.config is None:
            raise UsageError("a command or --config is required", {"prog": parser.prog})
    except UsageError as exc:
        payload, exit_code = handle_exception(exc)
        sys.stdout.write(dumps(payload))
        return exit_code

    configure_logging(settings)
    run_id = None
    try:
        with structured_run(args.command or "config", getattr(args, "action", None)) as context:
            run_id = context.run_id
            config = RunService.load_config(args.config) if args.config else args.build(args)
            text = RunService.run(config)
            if not config.out:
                sys.stdout.write(text)
    except Exception as exc:
        payload, exit_code = handle_exception(exc, run_id, debug=args.debug)
        sys.stdout.write(dumps(payload))
        return exit_code
    return 0
