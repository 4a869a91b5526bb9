import argparse

from chainlab.cli.dependencies import command_parser, make_config
from chainlab.schemas.run import RunConfig


def fixtures(args: argparse.Namespace) -> RunConfig:
    return make_config(args, "fixtures", None, {"write": args.write}, {})


def register(subparsers) -> None:
    p = command_parser(subparsers, "fixtures", help="list bundled fixtures and their expected values")
    p.add_argument("--write", help="also write every fixture space into this directory")
    p.set_defaults(build=fixtures)
