import hashlib
import logging
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import ValidationError

from chainlab.core.config import Settings, settings as default_settings
from chainlab.core.errors import ConfigParse, InvalidParameter, MissingInput
from chainlab.schemas.field import FieldRole, ScalarField
from chainlab.schemas.modulus import ChainFamily, EndpointPolicy, FunctionClass
from chainlab.schemas.potential import PotentialSpec
from chainlab.schemas.run import RunConfig
from chainlab.schemas.space import PointCloudSpace
from chainlab.services.approximation_service import ApproximationService
from chainlab.services.chain_service import ChainService
from chainlab.services.fixture_service import FIXTURE_PREFIX, FixtureService
from chainlab.services.gradient_service import GradientService
from chainlab.services.modulus_service import ModulusService
from chainlab.services.poincare_service import Measure, PoincareService
from chainlab.services.space_service import SpaceService
from chainlab.utils import io
from chainlab.utils.expression import compile_expression, evaluate_on_coords

logger = logging.getLogger(__name__)

EXPR_PREFIX = "expr:"

CsvTable = Tuple[List[str], List[List[Any]]]
HandlerResult = Tuple[Dict[str, Any], Optional[CsvTable]]


class RunInputs:
    """Lazy access to the inputs of one run, with digests of everything read."""

    def __init__(self, refs: Dict[str, str], settings: Settings):
        self.refs = refs
        self.settings = settings
        self.digests: Dict[str, str] = {}
        self._space: Optional[PointCloudSpace] = None

    def _digest(self, role: str, ref: str) -> None:
        if ref.startswith((FIXTURE_PREFIX, EXPR_PREFIX)):
            self.digests[role] = "sha256:" + hashlib.sha256(ref.encode("utf-8")).hexdigest()
        else:
            self.digests[role] = io.file_digest(ref)

    def ref(self, role: str) -> str:
        if role not in self.refs:
            raise MissingInput(f"Input {role!r} is required", {"role": role})
        return self.refs[role]

    def has(self, role: str) -> bool:
        return role in self.refs

    @property
    def space(self) -> PointCloudSpace:
        if self._space is None:
            ref = self.ref("space")
            if ref.startswith(FIXTURE_PREFIX):
                self._space = FixtureService.build(ref, self.settings)
            else:
                masses = self.refs.get("masses")
                self._space = SpaceService.load_space(ref, masses, self.settings)
                if masses is not None:
                    self._digest("masses", masses)
            self._digest("space", ref)
        return self._space

    def field(self, role: str, kind: FieldRole = FieldRole.FUNCTION) -> ScalarField:
        """A per-point field from a vector file, an expression of the coordinates, or a fixture."""
        ref = self.ref(role)
        space = self.space
        if ref.startswith(EXPR_PREFIX):
            if space.coords is None:
                raise InvalidParameter(f"Expression input {role!r} needs a space with coordinates")
            values = evaluate_on_coords(ref[len(EXPR_PREFIX):], space.coords)
        elif ref.startswith(FIXTURE_PREFIX):
            values = FixtureService.default_u(ref, space).values
        else:
            values = io.read_vector(ref)
        if values.shape != (space.n,):
            raise InvalidParameter(
                f"Input {role!r} has {values.size} values for {space.n} points",
                {"role": role, "size": int(values.size), "n": space.n}
            )
        self._digest(role, ref)
        return ScalarField(values=values, role=kind)

    def chains(self, role: str = "chains") -> List[List[Any]]:
        """A JSON list of chains, each a list of labels or indices."""
        ref = self.ref(role)
        chains = io.read_json(ref)
        if not isinstance(chains, list) or not all(isinstance(c, list) for c in chains):
            raise InvalidParameter(f"Input {role!r} must be a JSON list of chains", {"role": role})
        self._digest(role, ref)
        return chains


def _param(parameters: Dict[str, Any], name: str, default: Any = ...) -> Any:
    if name in parameters:
        return parameters[name]
    if default is ...:
        raise InvalidParameter(f"Parameter {name!r} is required", {"parameter": name})
    return default


def _point(space: PointCloudSpace, value: Any) -> int:
    try:
        return space.index_of(value)
    except ValueError as e:
        raise InvalidParameter(str(e), {"point": value})


def _points(space: PointCloudSpace, values) -> List[int]:
    return [_point(space, v) for v in values]


def _vector_table(name: str, space: PointCloudSpace, values: np.ndarray) -> CsvTable:
    return ["id", name], [[space.label_of(i), float(v)] for i, v in enumerate(values)]


def _family(space: PointCloudSpace, spec: Dict[str, Any], inputs: Optional[RunInputs] = None) -> ChainFamily:
    kind = spec.get("kind")
    if kind == "connect":
        return ChainFamily.connect(_point(space, spec.get("x")), _point(space, spec.get("y")))
    if kind == "hit":
        policy = EndpointPolicy(spec.get("endpoint_policy", "any"))
        return ChainFamily.hit(_points(space, spec.get("set", [])), policy)
    if kind == "explicit":
        chains = spec.get("chains")
        if chains is None and inputs is not None and inputs.has("chains"):
            chains = inputs.chains()
        return ChainFamily.explicit([_points(space, c) for c in chains or []])
    raise InvalidParameter(f"Unknown family kind {kind!r}", {"kinds": ["connect", "hit", "explicit"]})


def _measure(space: PointCloudSpace, spec: Optional[Dict[str, Any]], inputs: RunInputs, settings) -> Measure:
    """Riesz weights, a per-point density input, or None for the space mass."""
    if spec is not None:
        if spec.get("kind") != "riesz":
            raise InvalidParameter(f"Unknown measure kind {spec.get('kind')!r}", {"kinds": ["riesz"]})
        return PoincareService.riesz_weights(
            space,
            _point(space, _param(spec, "x")),
            _point(space, _param(spec, "y")),
            float(spec.get("L", 1.0)),
            settings=settings,
        )
    if inputs.has("measure"):
        return inputs.field("measure", FieldRole.DENSITY)
    return None


def _function_class(space: PointCloudSpace, spec: Optional[Dict[str, Any]]) -> Optional[FunctionClass]:
    if spec is None:
        return None
    spec = dict(spec)
    for pole in ("x", "y"):
        if spec.get(pole) is not None:
            spec[pole] = _point(space, spec[pole])
    return FunctionClass.model_validate(spec)


# ============= HANDLERS =============

def _space_gen(params, inputs: RunInputs, settings) -> HandlerResult:
    if "fixture" in params:
        space = FixtureService.build(params["fixture"], settings)
    else:
        space = SpaceService.generate_space(_param(params, "descriptor"), settings)
    if params.get("alpha") is not None:
        space = SpaceService.snowflake(space, float(params["alpha"]), settings)
    return {"space": SpaceService.to_document(space).model_dump()}, None


def _space_validate(params, inputs: RunInputs, settings) -> HandlerResult:
    space = inputs.space
    outputs: Dict[str, Any] = {
        "n": space.n,
        "total_mass": space.total_mass,
        "diameter": space.diameter,
        "zero_mass_points": [space.label_of(i) for i in np.flatnonzero(space.mass == 0)],
        "doubling": SpaceService.doubling_constant(space, params.get("radii")),
    }
    if params.get("eps") is not None:
        partition = SpaceService.chain_components(space, float(params["eps"]), settings)
        outputs["components"] = {"count": partition.count, "min_gap": partition.min_gap}
    return outputs, None


def _gradient_verify(params, inputs: RunInputs, settings) -> HandlerResult:
    result = GradientService.verify_upper_gradient(
        inputs.space,
        inputs.field("u"),
        inputs.field("g", FieldRole.GRADIENT),
        float(_param(params, "eps")),
        lam=float(params.get("lambda", 0.5)),
        symmetric=bool(params.get("symmetric", False)),
        weak=bool(params.get("weak", False)),
        settings=settings,
    )
    return {"result": result}, None


def _gradient_min(params, inputs: RunInputs, settings, weak: bool = False) -> HandlerResult:
    space = inputs.space
    solve = GradientService.minimal_weak_gradient if weak else GradientService.minimal_gradient
    report = solve(
        space,
        inputs.field("u"),
        float(_param(params, "eps")),
        p=float(params.get("p", 1.0)),
        lam=float(params.get("lambda", 0.5)),
        symmetric=bool(params.get("symmetric", False)),
        settings=settings,
    )
    return {"report": report}, _vector_table("g", space, report.argument)


def _gradient_weak(params, inputs: RunInputs, settings) -> HandlerResult:
    return _gradient_min(params, inputs, settings, weak=True)


def _gradient_ladder(params, inputs: RunInputs, settings) -> HandlerResult:
    rungs = GradientService.energy_ladder(
        inputs.space,
        inputs.field("u"),
        [float(e) for e in _param(params, "eps_list")],
        p=float(params.get("p", 1.0)),
        lam=float(params.get("lambda", 0.5)),
        symmetric=bool(params.get("symmetric", False)),
        settings=settings,
    )
    table = (["eps", "objective", "status"], [[r.eps, r.objective, r.status.value] for r in rungs])
    return {"rungs": rungs}, table


def _modulus(params, inputs: RunInputs, settings) -> HandlerResult:
    space = inputs.space
    family = _family(space, _param(params, "family"), inputs)
    eps = float(_param(params, "eps"))
    p = float(params.get("p", 1.0))
    lam = float(params.get("lambda", 0.5))
    measure = _measure(space, params.get("measure"), inputs, settings)

    if params.get("exceptional"):
        verdict = ModulusService.is_weak_exceptional(space, family, eps, p, lam, measure, settings)
        return {"verdict": verdict}, None

    report = ModulusService.chain_modulus(
        space, family, eps, p, measure, _function_class(space, params.get("class")), lam, settings
    )
    return {"report": report}, _vector_table("rho", space, report.argument)


def _keith(params, inputs: RunInputs, settings) -> HandlerResult:
    space = inputs.space
    rungs = ModulusService.keith_modulus_ladder(
        space,
        _point(space, _param(params, "x")),
        _point(space, _param(params, "y")),
        float(params.get("L", 1.0)),
        float(params.get("p", 1.0)),
        [float(e) for e in _param(params, "eps_list")],
        fclass=_function_class(space, params.get("class")),
        lam=float(params.get("lambda", 0.5)),
        settings=settings,
    )
    table = (
        ["eps", "objective", "scaled", "status"],
        [[r.eps, r.objective, r.scaled, r.status.value] for r in rungs],
    )
    return {"rungs": rungs}, table


def _poincare_riesz(params, inputs: RunInputs, settings) -> HandlerResult:
    space = inputs.space
    doubling = None
    if params.get("doubling", True):
        doubling = SpaceService.doubling_constant(space, params.get("radii")).constant
    riesz = PoincareService.riesz_weights(
        space,
        _point(space, _param(params, "x")),
        _point(space, _param(params, "y")),
        float(params.get("L", 1.0)),
        doubling_constant=doubling,
        settings=settings,
    )
    return {"riesz": riesz, "doubling_constant": doubling}, _vector_table("weight", space, riesz.weights)


def _poincare_ball(params, inputs: RunInputs, settings) -> HandlerResult:
    audit = PoincareService.ball_pi_audit(
        inputs.space,
        inputs.field("u"),
        inputs.field("g", FieldRole.GRADIENT),
        p=float(params.get("p", 1.0)),
        dilation=float(params.get("dilation", 1.0)),
        radii=params.get("radii"),
        settings=settings,
    )
    table = (
        ["center", "radius", "lhs", "rhs", "ratio"],
        [[c.center, c.radius, c.lhs, c.rhs, c.ratio] for c in audit.cases],
    )
    summary = audit.model_copy(update={"cases": []})
    return {"audit": summary, "case_count": len(audit.cases)}, table


def _poincare_pointwise(params, inputs: RunInputs, settings) -> HandlerResult:
    space = inputs.space
    result = PoincareService.pointwise_pi_check(
        space,
        _point(space, _param(params, "x")),
        _point(space, _param(params, "y")),
        inputs.field("g", FieldRole.GRADIENT),
        p=float(params.get("p", 1.0)),
        C=float(params.get("C", 1.0)),
        L=float(params.get("L", 1.0)),
        lam=float(params.get("lambda", 0.5)),
        eps=params.get("eps"),
        settings=settings,
    )
    return {"result": result}, None


def _poincare_width(params, inputs: RunInputs, settings) -> HandlerResult:
    space = inputs.space
    width = PoincareService.chain_width(
        space,
        _point(space, _param(params, "x")),
        _point(space, _param(params, "y")),
        _points(space, _param(params, "set")),
        float(_param(params, "eps")),
        settings,
    )
    return {"width": width}, None


def _poincare_minkowski(params, inputs: RunInputs, settings) -> HandlerResult:
    space = inputs.space
    measure = None
    if inputs.has("measure"):
        measure = inputs.field("measure", FieldRole.DENSITY)
    elif params.get("x") is not None and params.get("y") is not None:
        measure = PoincareService.riesz_weights(
            space, _point(space, params["x"]), _point(space, params["y"]), float(params.get("L", 1.0)),
            settings=settings,
        )
    profile = PoincareService.minkowski_profile(
        space, _points(space, _param(params, "set")), measure, params.get("radii")
    )
    table = (
        ["radius", "shell_measure", "value", "empty"],
        [[e.radius, e.shell_measure, e.value, e.empty] for e in profile.entries],
    )
    return {"profile": profile}, table


def _poincare_bmc(params, inputs: RunInputs, settings) -> HandlerResult:
    space = inputs.space
    audit = PoincareService.bmc_audit(
        space,
        _point(space, _param(params, "x")),
        _point(space, _param(params, "y")),
        float(params.get("L", 1.0)),
        [_points(space, region) for region in _param(params, "candidates")],
        float(_param(params, "eps")),
        radii=params.get("radii"),
        settings=settings,
    )
    rows = [
        [k, w.radius, w.shell_size, w.width, w.shell_measure, w.ratio, w.lower_bound]
        for k, candidate in enumerate(audit.candidates)
        for w in candidate.widths
    ]
    table = (["candidate", "radius", "shell_size", "width", "shell_measure", "ratio", "lower_bound"], rows)
    return {"audit": audit}, table


def _potential(params, inputs: RunInputs, settings) -> HandlerResult:
    space = inputs.space
    seeds = _points(space, _param(params, "seeds"))
    if "seed_values" in params:
        seed_values = [float(v) for v in params["seed_values"]]
    else:
        u = inputs.field("u")
        seed_values = [float(u.values[i]) for i in seeds]
    if len(seed_values) != len(seeds):
        raise InvalidParameter("One value per seed is required")
    spec = PotentialSpec(
        seeds=tuple(seeds),
        seed_values=tuple(seed_values),
        g=inputs.field("g", FieldRole.GRADIENT),
        eps=float(_param(params, "eps")),
        lam=float(params.get("lambda", 0.5)),
        cap=params.get("cap"),
    )
    potential = ApproximationService.chain_potential(space, spec, settings)
    check = ApproximationService.potential_gradient_check(space, spec, settings=settings)
    return {"potential": potential.values, "check": check}, _vector_table("potential", space, potential.values)


def _leibniz(params, inputs: RunInputs, settings) -> HandlerResult:
    space = inputs.space
    u = inputs.field("u")
    phi = inputs.field("phi")
    eps = float(_param(params, "eps"))
    bound = ApproximationService.leibniz_gradient(space, u, phi, inputs.field("g", FieldRole.GRADIENT), eps, settings)
    check = GradientService.verify_upper_gradient(
        space, ScalarField.function(u.values * phi.values), bound, eps, settings=settings
    )
    return {"gradient": bound.values, "check": check}, _vector_table("gradient", space, bound.values)


def _eb_pipeline(params, inputs: RunInputs, settings) -> HandlerResult:
    u = compile_expression(str(_param(params, "u")))
    g = compile_expression(str(_param(params, "g")))
    report = ApproximationService.eb_pipeline(
        [int(n) for n in _param(params, "sizes")],
        lambda x: u(x0=x),
        lambda x: g(x0=x),
        p=float(params.get("p", 1.0)),
        eps_factor=float(params.get("eps_factor", 2.0)),
        seeds=params.get("seeds", "full"),
        lam=float(params.get("lambda", 0.5)),
        settings=settings,
    )
    table = (
        ["n", "eps", "u_error", "g_error", "g_energy", "verified"],
        [[r.n, r.eps, r.u_error, r.g_error, r.g_energy, r.verified] for r in report.rows],
    )
    return {"report": report}, table


def _riemann(params, inputs: RunInputs, settings) -> HandlerResult:
    f = compile_expression(str(_param(params, "f")))
    value = ChainService.riemann_sum(
        lambda s: f(s=s),
        float(_param(params, "t")),
        int(_param(params, "n")),
        lam=float(params.get("lambda", 0.5)),
        ell=float(params.get("ell", 1.0)),
    )
    return {"value": value}, None


def _fixtures(params, inputs: RunInputs, settings) -> HandlerResult:
    outputs: Dict[str, Any] = {"fixtures": FixtureService.fixtures()}
    if params.get("write"):
        paths = FixtureService.write(params["write"], settings)
        outputs["written"] = [str(p) for p in paths]
    return outputs, None


Handler = Callable[[Dict[str, Any], RunInputs, Settings], HandlerResult]

HANDLERS: Dict[Tuple[str, Optional[str]], Handler] = {
    ("space", "gen"): _space_gen,
    ("space", "validate"): _space_validate,
    ("gradient", "verify"): _gradient_verify,
    ("gradient", "min"): _gradient_min,
    ("gradient", "weak"): _gradient_weak,
    ("gradient", "ladder"): _gradient_ladder,
    ("modulus", None): _modulus,
    ("keith", None): _keith,
    ("poincare", "riesz"): _poincare_riesz,
    ("poincare", "ball"): _poincare_ball,
    ("poincare", "pointwise"): _poincare_pointwise,
    ("poincare", "width"): _poincare_width,
    ("poincare", "minkowski"): _poincare_minkowski,
    ("poincare", "bmc"): _poincare_bmc,
    ("potential", None): _potential,
    ("leibniz", None): _leibniz,
    ("eb-pipeline", None): _eb_pipeline,
    ("riemann", None): _riemann,
    ("fixtures", None): _fixtures,
}


def _pop_runtimes(value: Any, found: List[float]) -> Any:
    """Move every runtime_ms out of the comparable payload."""
    if isinstance(value, dict):
        if "runtime_ms" in value:
            found.append(value["runtime_ms"])
        return {k: _pop_runtimes(v, found) for k, v in value.items() if k != "runtime_ms"}
    if isinstance(value, list):
        return [_pop_runtimes(v, found) for v in value]
    return value


class RunService:
    """Servicio de ejecución de comandos con resultados deterministas"""

    @staticmethod
    def effective_settings(config: RunConfig, base: Optional[Settings] = None) -> Settings:
        base = base or default_settings
        update = {}
        if config.tol_feas is not None:
            update["FEAS_TOL"] = config.tol_feas
        if config.tol_kkt is not None:
            update["KKT_TOL"] = config.tol_kkt
        if config.time_budget_ms is not None:
            update["LABEL_TIME_BUDGET_MS"] = config.time_budget_ms
        if config.seed is not None:
            update["DEFAULT_SEED"] = config.seed
        return base.model_copy(update=update) if update else base

    @staticmethod
    def load_config(path: str) -> RunConfig:
        """
        Raises:
            ConfigParse: the file is not a valid run configuration
        """
        try:
            return RunConfig.model_validate_json(io.read_text(path))
        except ValidationError as e:
            raise ConfigParse(f"Invalid run configuration: {path}", {"errors": e.errors(include_url=False)})

    @staticmethod
    def execute(config: RunConfig, settings: Optional[Settings] = None) -> Tuple[Dict[str, Any], Optional[str]]:
        """
        Run one command and build its result document.

        Returns:
            (result document, CSV text or None)
        """
        settings = RunService.effective_settings(config, settings)
        handler = HANDLERS.get((config.command, config.action))
        if handler is None:
            known = sorted(f"{c} {a}".strip() if a else c for c, a in HANDLERS)
            raise ConfigParse(
                f"Unknown command {config.command!r} {config.action or ''}".strip(),
                {"commands": known}
            )

        started = time.time()
        inputs = RunInputs(config.inputs, settings)
        outputs, table = handler(config.parameters, inputs, settings)

        runtimes: List[float] = []
        document = {
            "schema": settings.RESULT_SCHEMA_VERSION,
            "command": config.command,
            "action": config.action,
            "parameters": io.to_plain(config.parameters),
            "input_digests": dict(sorted(inputs.digests.items())),
            "outputs": _pop_runtimes(io.to_plain(outputs), runtimes),
            "meta": {
                "runtime_ms": (time.time() - started) * 1000.0,
                "solver_runtime_ms": runtimes,
            },
        }
        csv_text = None
        if table is not None:
            csv_text = io.rows_to_csv(table[0], table[1], settings.FLOAT_SIGNIFICANT_DIGITS)
        return document, csv_text

    @staticmethod
    def run(config: RunConfig, settings: Optional[Settings] = None) -> str:
        """Execute and persist; returns the result JSON text, also written to config.out when set."""
        settings = RunService.effective_settings(config, settings)
        document, csv_text = RunService.execute(config, settings)
        text = io.dumps(document, settings.FLOAT_SIGNIFICANT_DIGITS)
        if config.out:
            io.write_text(Path(config.out), text)
        if config.csv_out and csv_text is not None:
            io.write_text(Path(config.csv_out), csv_text)
        return text
