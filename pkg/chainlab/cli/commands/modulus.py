import argparse

from chainlab.cli.dependencies import (
    add_lambda,
    add_points,
    add_space,
    class_arg,
    collect_inputs,
    command_parser,
    family_arg,
    float_list,
    make_config,
    measure_arg,
)
from chainlab.schemas.run import RunConfig


def modulus(args: argparse.Namespace) -> RunConfig:
    inputs = collect_inputs(args, ["space", "masses"])
    family = dict(args.family)
    if "file" in family:
        inputs["chains"] = family.pop("file")
    if args.endpoint_policy is not None:
        family["endpoint_policy"] = args.endpoint_policy

    measure = args.measure
    if isinstance(measure, str):
        inputs["measure"] = measure
        measure = None

    return make_config(args, "modulus", None, {
        "family": family,
        "eps": args.eps,
        "p": args.p,
        "lambda": args.lam,
        "measure": measure,
        "class": args.function_class,
        "exceptional": args.exceptional or None,
    }, inputs)


def keith(args: argparse.Namespace) -> RunConfig:
    return make_config(args, "keith", None, {
        "x": args.x,
        "y": args.y,
        "L": args.L,
        "p": args.p,
        "eps_list": args.eps_list,
        "lambda": args.lam,
        "class": args.function_class,
    }, collect_inputs(args, ["space", "masses"]))


def register(subparsers) -> None:
    p = command_parser(subparsers, "modulus", help="p-modulus of a chain family")
    add_space(p)
    p.add_argument("--family", type=family_arg, required=True, help="connect:x,y | hit:ids | file:chains.json")
    p.add_argument("--endpoint-policy", choices=["any", "not_last", "not_first"], help="hit families only")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--class", dest="function_class", type=class_arg, help="all | finite:x,y | lip[:K]")
    p.add_argument(
        "--measure", type=measure_arg, default=None,
        help="default | riesz:x,y[,L] | per-point density (file, expr: or fixture:)",
    )
    p.add_argument("--exceptional", action="store_true", help="report the exceptional-set verdict")
    add_lambda(p)
    p.set_defaults(build=modulus)

    p = command_parser(subparsers, "keith", help="connect-family modulus against the Riesz measure per scale")
    add_space(p)
    add_points(p)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--eps-list", type=float_list, required=True)
    p.add_argument("--class", dest="function_class", type=class_arg, help="all | finite:x,y | lip[:K]")
    add_lambda(p)
    p.set_defaults(build=keith)
