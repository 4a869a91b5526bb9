import argparse

from chainlab.cli.dependencies import (
    add_field,
    add_lambda,
    add_space,
    collect_inputs,
    command_parser,
    float_list,
    id_list,
    int_list,
    make_config,
)
from chainlab.schemas.run import RunConfig


def potential(args: argparse.Namespace) -> RunConfig:
    return make_config(args, "potential", None, {
        "seeds": args.seeds,
        "seed_values": args.seed_values,
        "eps": args.eps,
        "lambda": args.lam,
        "cap": args.cap,
    }, collect_inputs(args, ["space", "masses", "u", "g"]))


def leibniz(args: argparse.Namespace) -> RunConfig:
    return make_config(args, "leibniz", None, {"eps": args.eps}, collect_inputs(args, ["space", "masses", "u", "phi", "g"]))


def eb_pipeline(args: argparse.Namespace) -> RunConfig:
    return make_config(args, "eb-pipeline", None, {
        "sizes": args.sizes,
        "u": args.u,
        "g": args.g,
        "p": args.p,
        "eps_factor": args.eps_factor,
        "seeds": args.seeds,
        "lambda": args.lam,
    }, {})


def register(subparsers) -> None:
    p = command_parser(subparsers, "potential", help="chain potential from seed values")
    add_space(p)
    p.add_argument("--seeds", type=id_list, required=True)
    p.add_argument("--seed-values", type=float_list, help="defaults to the values of --u at the seeds")
    add_field(p, "u", required=False)
    add_field(p, "g")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--cap", type=float, help="truncation level M")
    add_lambda(p)
    p.set_defaults(build=potential)

    p = command_parser(subparsers, "leibniz", help="upper gradient of a product u * phi")
    add_space(p)
    add_field(p, "u")
    add_field(p, "phi")
    add_field(p, "g", help="eps-upper gradient of u")
    p.add_argument("--eps", type=float, required=True)
    p.set_defaults(build=leibniz)

    p = command_parser(subparsers, "eb-pipeline", help="potential approximation on refining [0, 1] grids")
    p.add_argument("--sizes", type=int_list, required=True, help="grid sizes N, e.g. 64,128,256")
    p.add_argument("--u", required=True, help="expression in x, e.g. x*(1-x)")
    p.add_argument("--g", required=True, help="expression in x, e.g. abs(1-2*x)")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--eps-factor", type=float, default=2.0)
    p.add_argument("--seeds", choices=["full", "boundary"], default="full")
    add_lambda(p)
    p.set_defaults(build=eb_pipeline)
