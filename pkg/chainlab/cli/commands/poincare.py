import argparse

from chainlab.cli.dependencies import (
    add_field,
    add_lambda,
    add_points,
    add_space,
    collect_inputs,
    command_parser,
    float_list,
    id_list,
    json_value,
    make_config,
)
from chainlab.schemas.run import RunConfig

ROLES = ["space", "masses", "u", "g", "measure"]


def riesz(args: argparse.Namespace) -> RunConfig:
    return make_config(args, "poincare", "riesz", {
        "x": args.x, "y": args.y, "L": args.L, "doubling": False if args.no_doubling else None,
    }, collect_inputs(args, ROLES))


def ball(args: argparse.Namespace) -> RunConfig:
    return make_config(args, "poincare", "ball", {
        "p": args.p, "dilation": args.dilation, "radii": args.radii,
    }, collect_inputs(args, ROLES))


def pointwise(args: argparse.Namespace) -> RunConfig:
    return make_config(args, "poincare", "pointwise", {
        "x": args.x, "y": args.y, "p": args.p, "C": args.C, "L": args.L, "lambda": args.lam, "eps": args.eps,
    }, collect_inputs(args, ROLES))


def width(args: argparse.Namespace) -> RunConfig:
    return make_config(args, "poincare", "width", {
        "x": args.x, "y": args.y, "set": args.set, "eps": args.eps,
    }, collect_inputs(args, ROLES))


def minkowski(args: argparse.Namespace) -> RunConfig:
    return make_config(args, "poincare", "minkowski", {
        "set": args.set, "radii": args.radii, "x": args.x, "y": args.y, "L": args.L,
    }, collect_inputs(args, ROLES))


def bmc(args: argparse.Namespace) -> RunConfig:
    return make_config(args, "poincare", "bmc", {
        "x": args.x, "y": args.y, "L": args.L, "candidates": args.candidates, "eps": args.eps, "radii": args.radii,
    }, collect_inputs(args, ROLES))


def register(subparsers) -> None:
    parser = subparsers.add_parser("poincare", help="Riesz measures and Poincare diagnostics")
    actions = parser.add_subparsers(dest="action", required=True)

    p = command_parser(actions, "riesz", help="truncated two-pole Riesz weights")
    add_space(p)
    add_points(p)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--no-doubling", action="store_true", help="skip the doubling bound")
    p.set_defaults(build=riesz)

    p = command_parser(actions, "ball", help="empirical constant of the ball inequality")
    add_space(p)
    add_field(p, "u")
    add_field(p, "g")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--dilation", type=float, default=1.0)
    p.add_argument("--radii", type=float_list)
    p.set_defaults(build=ball)

    p = command_parser(actions, "pointwise", help="length-constrained chain against the Riesz integral")
    add_space(p)
    add_points(p)
    add_field(p, "g")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--eps", type=float, help="defaults to the smallest scale joining x and y")
    add_lambda(p)
    p.set_defaults(build=pointwise)

    p = command_parser(actions, "width", help="chain width of a set between two points")
    add_space(p)
    add_points(p)
    p.add_argument("--set", type=id_list, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.set_defaults(build=width)

    p = command_parser(actions, "minkowski", help="shell measure profile of a set")
    add_space(p)
    p.add_argument("--set", type=id_list, required=True)
    p.add_argument("--radii", type=float_list)
    add_field(p, "measure", required=False, help="measure density (or give --x/--y for the Riesz measure)")
    p.add_argument("--x")
    p.add_argument("--y")
    p.add_argument("--L", type=float, default=1.0)
    p.set_defaults(build=minkowski)

    p = command_parser(actions, "bmc", help="separating-set audit under the Riesz measure")
    add_space(p)
    add_points(p)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--candidates", type=json_value, required=True, help="JSON list of regions, each a list of ids")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--radii", type=float_list)
    p.set_defaults(build=bmc)
