import argparse

from chainlab.cli.dependencies import (
    add_space,
    collect_inputs,
    command_parser,
    float_list,
    json_value,
    make_config,
)
from chainlab.schemas.run import RunConfig


def gen(args: argparse.Namespace) -> RunConfig:
    return make_config(args, "space", "gen", {
        "descriptor": args.descriptor,
        "fixture": args.fixture,
        "alpha": args.alpha,
    }, {})


def validate(args: argparse.Namespace) -> RunConfig:
    return make_config(args, "space", "validate", {
        "eps": args.eps,
        "radii": args.radii,
    }, collect_inputs(args, ["space", "masses"]))


def register(subparsers) -> None:
    parser = subparsers.add_parser("space", help="generate and validate spaces")
    actions = parser.add_subparsers(dest="action", required=True)

    p = command_parser(actions, "gen", help="generate a grid, two-sequence or punctured-grid space")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--descriptor", type=json_value, help='JSON descriptor, e.g. {"kind": "grid", "side": 11, "spacing": 0.1}')
    source.add_argument("--fixture", help="name of a bundled fixture")
    p.add_argument("--alpha", type=float, help="snowflake exponent in (0, 1)")
    p.set_defaults(build=gen)

    p = command_parser(actions, "validate", help="load a space and report metric checks")
    add_space(p)
    p.add_argument("--eps", type=float, help="also report chain components at this scale")
    p.add_argument("--radii", type=float_list, help="radii for the doubling estimate")
    p.set_defaults(build=validate)
