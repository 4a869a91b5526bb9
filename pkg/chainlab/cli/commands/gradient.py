import argparse

from chainlab.cli.dependencies import (
    add_field,
    add_lambda,
    add_space,
    collect_inputs,
    command_parser,
    float_list,
    make_config,
)
from chainlab.schemas.run import RunConfig

ROLES = ["space", "masses", "u", "g"]


def _common(args: argparse.Namespace) -> dict:
    return {"lambda": args.lam, "symmetric": args.symmetric or None}


def verify(args: argparse.Namespace) -> RunConfig:
    return make_config(args, "gradient", "verify", {
        "eps": args.eps, "weak": args.weak or None, **_common(args)
    }, collect_inputs(args, ROLES))


def minimal(args: argparse.Namespace) -> RunConfig:
    return make_config(args, "gradient", args.action, {
        "eps": args.eps, "p": args.p, **_common(args)
    }, collect_inputs(args, ROLES))


def ladder(args: argparse.Namespace) -> RunConfig:
    return make_config(args, "gradient", "ladder", {
        "eps_list": args.eps_list, "p": args.p, **_common(args)
    }, collect_inputs(args, ROLES))


def register(subparsers) -> None:
    parser = subparsers.add_parser("gradient", help="upper gradients and minimal energies")
    actions = parser.add_subparsers(dest="action", required=True)

    def base(name: str, help: str) -> argparse.ArgumentParser:
        p = command_parser(actions, name, help=help)
        add_space(p)
        add_field(p, "u")
        add_lambda(p)
        orientation = p.add_mutually_exclusive_group()
        orientation.add_argument(
            "--one-sided", dest="symmetric", action="store_false", help="signed (eps, lambda) definition (default)"
        )
        orientation.add_argument(
            "--symmetric", dest="symmetric", action="store_true", help="also require the bound for -u"
        )
        p.set_defaults(symmetric=False)
        return p

    p = base("verify", "check g against every eps-pair")
    add_field(p, "g")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--weak", action="store_true", help="skip pairs touching zero-mass points")
    p.set_defaults(build=verify)

    for name, help in (("min", "minimal eps-upper gradient"), ("weak", "minimal weak eps-upper gradient")):
        p = base(name, help)
        p.add_argument("--eps", type=float, required=True)
        p.add_argument("--p", type=float, default=1.0)
        p.set_defaults(build=minimal)

    p = base("ladder", "minimal energies along decreasing scales")
    p.add_argument("--eps-list", type=float_list, required=True)
    p.add_argument("--p", type=float, default=1.0)
    p.set_defaults(build=ladder)
