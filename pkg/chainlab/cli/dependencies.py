import argparse
import json
from typing import Any, Dict, List, Optional, Union

from chainlab.core.errors import UsageError
from chainlab.schemas.run import RunConfig


class ChainLabArgumentParser(argparse.ArgumentParser):
    """Parse errors become UsageError so they reach the JSON error handler."""

    def error(self, message: str):
        raise UsageError(message, {"prog": self.prog})


def add_global_options(parser: argparse.ArgumentParser, nested: bool = False) -> None:
    """
    Flags accepted before or after the subcommand.

    Nested parsers default to SUPPRESS so a flag given before the
    subcommand is not reset by the subcommand's own default.
    """
    default = argparse.SUPPRESS if nested else None
    parser.add_argument("--out", default=default, help="result JSON path (standard output when omitted)")
    parser.add_argument("--csv-out", default=default, help="CSV table path for commands that emit profiles")
    parser.add_argument("--seed", type=int, default=default, help="seed for randomized checks")
    parser.add_argument("--tol-feas", type=float, default=default, help="feasibility tolerance override")
    parser.add_argument("--tol-kkt", type=float, default=default, help="KKT residual tolerance override")
    parser.add_argument("--time-budget-ms", type=int, default=default, help="time budget for label-setting searches")
    parser.add_argument(
        "--debug", action="store_true", default=argparse.SUPPRESS if nested else False,
        help="include tracebacks in error output",
    )


def command_parser(subparsers, name: str, help: str) -> argparse.ArgumentParser:
    """A runnable subcommand; carries the global flags too."""
    parser = subparsers.add_parser(name, help=help)
    add_global_options(parser, nested=True)
    return parser


def float_list(text: str) -> List[float]:
    """Comma-separated floats: "0.1,0.05,0.025"."""
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def id_list(text: str) -> List[str]:
    """Comma-separated point ids; labels and indices are resolved against the space later."""
    return [v.strip() for v in text.split(",") if v.strip()]


def json_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise argparse.ArgumentTypeError(f"invalid JSON: {e.msg}")


def family_arg(text: str) -> Dict[str, Any]:
    """connect:x,y | hit:ids | file:chains.json, or a JSON object."""
    if text.lstrip().startswith("{"):
        return json_value(text)
    kind, _, rest = text.partition(":")
    ids = id_list(rest)
    if kind == "connect" and len(ids) == 2:
        return {"kind": "connect", "x": ids[0], "y": ids[1]}
    if kind == "hit" and ids:
        return {"kind": "hit", "set": ids}
    if kind == "file" and rest:
        return {"kind": "explicit", "file": rest}
    raise argparse.ArgumentTypeError(f"expected connect:x,y, hit:ids or file:chains.json, got {text!r}")


def class_arg(text: str) -> Dict[str, Any]:
    """all | finite:x,y | lip[:K], or a JSON object."""
    if text.lstrip().startswith("{"):
        return json_value(text)
    tag, _, rest = text.partition(":")
    if tag == "all" and not rest:
        return {"tag": "all_borel"}
    if tag == "finite":
        poles = id_list(rest)
        if len(poles) == 2:
            return {"tag": "finite_at", "x": poles[0], "y": poles[1]}
    if tag == "lip":
        if not rest:
            return {"tag": "lipschitz"}
        try:
            return {"tag": "lipschitz", "bound": float(rest)}
        except ValueError:
            pass
    raise argparse.ArgumentTypeError(f"expected all, finite:x,y or lip[:K], got {text!r}")


def measure_arg(text: str) -> Union[None, str, Dict[str, Any]]:
    """
    default | riesz:x,y[,L] | a per-point density reference.

    default gives None (the space mass); a density reference is returned
    as is and read like any other field input.
    """
    if text == "default":
        return None
    if text.startswith("riesz:"):
        parts = id_list(text[len("riesz:"):])
        if len(parts) in (2, 3):
            try:
                L = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError:
                raise argparse.ArgumentTypeError(f"invalid Riesz parameter L in {text!r}")
            return {"kind": "riesz", "x": parts[0], "y": parts[1], "L": L}
        raise argparse.ArgumentTypeError(f"expected riesz:x,y or riesz:x,y,L, got {text!r}")
    return text


def add_space(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--space", required=required, help="point-cloud JSON/CSV, distance CSV, or fixture:NAME")
    parser.add_argument("--masses", help="masses file when --space is a distance-matrix CSV")


def add_field(parser: argparse.ArgumentParser, name: str, required: bool = True, help: str = "") -> None:
    parser.add_argument(
        f"--{name}",
        required=required,
        help=help or f"{name} values: JSON/CSV file, expr:EXPRESSION, or fixture:NAME",
    )


def add_lambda(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda", dest="lam", type=float, default=0.5, help="chain integral weight in [0, 1]")


def add_points(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--x", required=True, help="first pole (label or index)")
    parser.add_argument("--y", required=True, help="second pole (label or index)")


def collect_inputs(args: argparse.Namespace, roles: List[str]) -> Dict[str, str]:
    return {role: getattr(args, role) for role in roles if getattr(args, role, None) is not None}


def drop_none(parameters: Dict[str, Any]) -> Dict[str, Any]:
    return {k: v for k, v in parameters.items() if v is not None}


def make_config(
    args: argparse.Namespace,
    command: str,
    action: Optional[str],
    parameters: Dict[str, Any],
    inputs: Dict[str, str],
) -> RunConfig:
    """RunConfig from parsed arguments plus the global flags."""
    return RunConfig(
        command=command,
        action=action,
        parameters=drop_none(parameters),
        inputs=inputs,
        out=args.out,
        csv_out=args.csv_out,
        seed=args.seed,
        tol_feas=args.tol_feas,
        tol_kkt=args.tol_kkt,
        time_budget_ms=args.time_budget_ms,
    )

