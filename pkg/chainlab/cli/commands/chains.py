import argparse

from chainlab.cli.dependencies import add_lambda, command_parser, make_config
from chainlab.schemas.run import RunConfig


def riemann(args: argparse.Namespace) -> RunConfig:
    return make_config(args, "riemann", None, {
        "f": args.f, "t": args.t, "n": args.n, "lambda": args.lam, "ell": args.ell,
    }, {})


def register(subparsers) -> None:
    p = command_parser(subparsers, "riemann", help="shifted Riemann sum of an expression in s over [0, ell]")
    p.add_argument("--f", required=True, help="expression in s, e.g. s^2")
    p.add_argument("--t", type=float, required=True, help="shift in [0, 1]")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ell", type=float, default=1.0)
    add_lambda(p)
    p.set_defaults(build=riemann)
