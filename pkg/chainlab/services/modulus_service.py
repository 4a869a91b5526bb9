import logging
import math
import time
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

from chainlab.core.config import Settings, settings as default_settings
from chainlab.core.errors import InvalidParameter, SolverStall
from chainlab.schemas.field import ScalarField
from chainlab.schemas.modulus import (
    ChainFamily,
    EndpointPolicy,
    ExceptionalVerdict,
    FamilyKind,
    FunctionClass,
    FunctionClassTag,
)
from chainlab.schemas.poincare import RieszWeights
from chainlab.schemas.report import LadderRung, SolveReport, SolveStatus
from chainlab.schemas.space import EpsilonGraph, PointCloudSpace
from chainlab.services.poincare_service import PoincareService
from chainlab.services.space_service import SpaceService
from chainlab.utils.graph.shortest_path import dijkstra
from chainlab.utils.numeric import check_eps, check_lambda, eps_threshold, safe_product
from chainlab.utils.solver.programs import ProgramSolution, solve_convex, solve_linear

logger = logging.getLogger(__name__)

Measure = Optional[Union[ScalarField, RieszWeights]]


class Cut:
    """One admissibility constraint coefficients . rho >= 1 for a chain."""

    __slots__ = ("chain", "coefficients", "key")

    def __init__(self, chain: Tuple[int, ...], coefficients: np.ndarray):
        self.chain = chain
        self.coefficients = coefficients
        self.key = tuple(np.round(coefficients, 12).tolist())


def chain_coefficients(space: PointCloudSpace, chain: Sequence[int], lam: float) -> np.ndarray:
    points = np.asarray(chain, dtype=int)
    lengths = space.dist[points[:-1], points[1:]]
    coefficients = np.zeros(space.n)
    np.add.at(coefficients, points[:-1], lam * lengths)
    np.add.at(coefficients, points[1:], (1.0 - lam) * lengths)
    return coefficients


def chain_value(space: PointCloudSpace, chain: Sequence[int], rho: np.ndarray, lam: float) -> float:
    points = np.asarray(chain, dtype=int)
    lengths = space.dist[points[:-1], points[1:]]
    values = safe_product(lam, rho[points[:-1]]) + safe_product(1.0 - lam, rho[points[1:]])
    return float(np.sum(safe_product(values, lengths)))


class ModulusService:
    """Servicio de módulo de familias de cadenas"""

    @staticmethod
    def resolve_measure(space: PointCloudSpace, measure: Measure) -> np.ndarray:
        """Point masses of the measure integrating rho^p."""
        return PoincareService.measure_weights(space, measure)

    @staticmethod
    def family_candidates(
        space: PointCloudSpace,
        graph: EpsilonGraph,
        family: ChainFamily,
        settings: Settings,
    ) -> List[Tuple[int, ...]]:
        """
        Finite candidate list for hit and explicit families.

        A chain meeting e contains a step starting or ending at e, and that
        two-point chain costs no more, so hit families reduce to the steps at
        E allowed by the endpoint policy. Explicit chains with a step above
        eps are outside the family.
        """
        if family.kind == FamilyKind.HIT:
            candidates = set()
            for e in family.hit_set:
                if not 0 <= e < space.n:
                    raise InvalidParameter(f"Point {e} is not in the space")
                for q in graph.neighbors[e].tolist():
                    if family.endpoint_policy != EndpointPolicy.NOT_FIRST:
                        candidates.add((e, q))
                    if family.endpoint_policy != EndpointPolicy.NOT_LAST:
                        candidates.add((q, e))
            return sorted(candidates)

        threshold = eps_threshold(graph.eps, settings.EPS_REL_TOL)
        kept = []
        for chain in family.chains:
            if any(not 0 <= q < space.n for q in chain):
                raise InvalidParameter(f"Chain {list(chain)} leaves the space")
            points = np.asarray(chain)
            if np.all(space.dist[points[:-1], points[1:]] <= threshold):
                kept.append(tuple(chain))
        return kept

    @staticmethod
    def upper_bounds(space: PointCloudSpace, fclass: FunctionClass) -> Optional[np.ndarray]:
        if fclass.tag != FunctionClassTag.FINITE_AT:
            return None
        upper = np.full(space.n, np.inf)
        upper[[fclass.x, fclass.y]] = fclass.pole_cap
        return upper

    @staticmethod
    def lipschitz_rows(space: PointCloudSpace, fclass: FunctionClass) -> Tuple[np.ndarray, np.ndarray]:
        """Rows rho_a - rho_b >= -K d(a, b) in both orders."""
        if fclass.tag != FunctionClassTag.LIPSCHITZ or fclass.bound is None:
            return np.zeros((0, space.n)), np.zeros(0)
        a, b = np.triu_indices(space.n, k=1)
        rows = np.zeros((2 * a.size, space.n))
        index = np.arange(a.size)
        rows[index, a] = 1.0
        rows[index, b] = -1.0
        rows[a.size + index, a] = -1.0
        rows[a.size + index, b] = 1.0
        rhs = -fclass.bound * np.concatenate([space.dist[a, b], space.dist[a, b]])
        return rows, rhs

    @staticmethod
    def null_certificate(
        space: PointCloudSpace,
        graph: EpsilonGraph,
        family: ChainFamily,
        weights: np.ndarray,
        lam: float,
    ) -> Optional[Dict]:
        """
        rho = value * chi_E for a hit family on a zero-measure set.

        With k = ceil(1 / shortest step at E), value = k / c where c is the
        weight of the endpoint at E; for lambda = 1/2 this is 2k. Only issued
        when every two-point chain through E gives E a positive weight.
        """
        if family.kind != FamilyKind.HIT:
            return None
        support = list(family.hit_set)
        if np.any(weights[support] > 0):
            return None

        policy = family.endpoint_policy
        coefficients = []
        if policy != EndpointPolicy.NOT_FIRST:
            coefficients.append(lam)
        if policy != EndpointPolicy.NOT_LAST:
            coefficients.append(1.0 - lam)
        weight = min(coefficients)
        if weight <= 0:
            return None

        steps = [float(graph.lengths[e].min()) for e in support if graph.lengths[e].size]
        if not steps:
            return None
        k = int(math.ceil(1.0 / min(steps)))
        value = k / weight
        return {
            "kind": "null_set",
            "support": support,
            "k": k,
            "value": value,
            "rule": "rho = value * chi_E, value = k / endpoint weight",
            "cost": 0.0,
        }

    @staticmethod
    def _solve_restricted(
        weights: np.ndarray,
        p: float,
        cuts: List[Cut],
        extra_rows: np.ndarray,
        extra_rhs: np.ndarray,
        upper: Optional[np.ndarray],
        settings: Settings,
    ) -> ProgramSolution:
        rows = np.vstack([np.array([c.coefficients for c in cuts]), extra_rows])
        rhs = np.concatenate([np.ones(len(cuts)), extra_rhs])
        A = sparse.csr_matrix(rows)
        if p == 1.0:
            return solve_linear(weights, A, rhs, upper, settings)
        return solve_convex(weights, p, A, rhs, upper, settings)

    @staticmethod
    def chain_modulus(
        space: PointCloudSpace,
        family: ChainFamily,
        eps: float,
        p: float = 1.0,
        measure: Measure = None,
        fclass: Optional[FunctionClass] = None,
        lam: float = 0.5,
        settings: Optional[Settings] = None,
    ) -> SolveReport:
        """
        (eps, p)-modulus by cutting planes.

        Each round the separation oracle returns the family chains whose
        lambda-integral of rho is below 1 - SEPARATION_TOL (Dijkstra for
        connect families, direct evaluation otherwise); they are added as
        cuts and the restricted program is solved again.

        Returns:
            SolveReport with objective sum w rho^p, argument rho, binding chains

        Raises:
            SolverStall: iteration budget exhausted
            NoAdmissibleDensity: the function class leaves no admissible density
        """
        settings = settings or default_settings
        started = time.time()
        lam = check_lambda(lam)
        eps = check_eps(eps)
        if p < 1:
            raise InvalidParameter(f"p must be at least 1, got {p}", {"p": p})
        p = float(p)
        fclass = fclass or FunctionClass.all_borel()
        graph = SpaceService.build_epsilon_graph(space, eps, settings)
        weights = ModulusService.resolve_measure(space, measure)
        upper = ModulusService.upper_bounds(space, fclass)
        extra_rows, extra_rhs = ModulusService.lipschitz_rows(space, fclass)

        def empty_report(reason: str) -> SolveReport:
            return SolveReport(
                objective=0.0,
                argument=np.zeros(space.n),
                status=SolveStatus.OPTIMAL,
                iterations=0,
                empty_family=True,
                dual_bound=0.0 if p == 1.0 else None,
                kkt_residual=None if p == 1.0 else 0.0,
                runtime_ms=(time.time() - started) * 1000.0,
                notes=[reason],
            )

        candidates: List[Tuple[int, ...]] = []
        if family.kind == FamilyKind.CONNECT:
            for point in (family.x, family.y):
                if not 0 <= point < space.n:
                    raise InvalidParameter(f"Point {point} is not in the space")
            partition = SpaceService.chain_components(space, eps, settings)
            if not partition.same_component(family.x, family.y):
                return empty_report("endpoints lie in different chain components")
        else:
            candidates = ModulusService.family_candidates(space, graph, family, settings)
            if not candidates:
                return empty_report("no eps-chain belongs to the family")
            candidate_matrix = np.array([chain_coefficients(space, c, lam) for c in candidates])

        def separate(rho: np.ndarray) -> List[Tuple[Tuple[int, ...], float]]:
            if family.kind == FamilyKind.CONNECT:
                result = dijkstra(graph, rho, lam, {family.x: 0.0}, target=family.y)
                return [(result.chain_to(family.y), float(result.distance[family.y]))]
            values = np.array([chain_value(space, c, rho, lam) for c in candidates])
            order = np.argsort(values, kind="stable")
            return [(candidates[i], float(values[i])) for i in order]

        rho = np.zeros(space.n)
        cuts: List[Cut] = []
        keys = set()
        solution: Optional[ProgramSolution] = None
        iterations = 0
        min_integral = 0.0

        while True:
            ranked = separate(rho)
            min_integral = ranked[0][1] if ranked else math.inf
            violated = [(c, v) for c, v in ranked if v < 1.0 - settings.SEPARATION_TOL]
            if not violated:
                break
            if iterations >= settings.MAX_CUTTING_PLANE_ITERATIONS:
                raise SolverStall(
                    f"Cutting planes did not converge in {iterations} iterations",
                    {"iterations": iterations, "cuts": len(cuts), "min_integral": min_integral}
                )
            iterations += 1

            added = 0
            for chain, _ in violated[:64]:
                cut = Cut(chain, chain_coefficients(space, chain, lam))
                if cut.key not in keys:
                    cuts.append(cut)
                    keys.add(cut.key)
                    added += 1
            if added == 0:
                raise SolverStall(
                    "Separation returned only known cuts",
                    {"iterations": iterations, "min_integral": min_integral}
                )

            if iterations % settings.CUT_PURGE_INTERVAL == 0:
                slack = np.array([c.coefficients @ rho for c in cuts])
                kept = [c for c, s in zip(cuts, slack) if s <= 1.0 + 1e-6]
                logger.debug("Purged %d slack cuts", len(cuts) - len(kept))
                cuts = kept
                keys = {c.key for c in cuts}

            solution = ModulusService._solve_restricted(
                weights, p, cuts, extra_rows, extra_rhs, upper, settings
            )
            rho = solution.x
            logger.debug("Iteration %d: %d cuts, objective %.12g", iterations, len(cuts), solution.objective)

        objective = float(np.sum(safe_product(weights, np.power(rho, p))))
        upper_bound = objective
        if 0 < min_integral < 1.0:
            upper_bound = objective / min_integral ** p

        binding = [
            c.chain for c in cuts if c.coefficients @ rho <= 1.0 + 1e-7
        ]
        kkt = solution.kkt_residual if solution is not None else (None if p == 1.0 else 0.0)
        dual_bound = solution.dual_bound if solution is not None else (0.0 if p == 1.0 else None)
        status = SolveStatus.OPTIMAL
        if p > 1.0 and kkt is not None and kkt > settings.KKT_TOL:
            status = SolveStatus.TOLERANCE_REACHED

        report = SolveReport(
            objective=objective,
            argument=rho,
            max_violation=max(0.0, 1.0 - min_integral),
            iterations=iterations,
            cuts=len(cuts),
            status=status,
            constraint_count=len(cuts) + extra_rhs.size,
            dual_bound=dual_bound,
            kkt_residual=kkt,
            upper_bound=upper_bound,
            runtime_ms=(time.time() - started) * 1000.0,
            binding_chains=binding,
            certificate=ModulusService.null_certificate(space, graph, family, weights, lam),
        )
        logger.info(
            "Modulus of %s family: %.12g after %d iterations and %d cuts",
            family.kind.value, objective, iterations, len(cuts)
        )
        return report

    @staticmethod
    def is_weak_exceptional(
        space: PointCloudSpace,
        family: ChainFamily,
        eps: float,
        p: float = 1.0,
        lam: float = 0.5,
        measure: Measure = None,
        settings: Optional[Settings] = None,
    ) -> ExceptionalVerdict:
        """Modulus zero within MODULUS_ZERO_TOL, with the null-set certificate when it applies."""
        settings = settings or default_settings
        report = ModulusService.chain_modulus(space, family, eps, p, measure, None, lam, settings)
        exceptional = report.objective <= settings.MODULUS_ZERO_TOL
        notes = list(report.notes)
        if lam in (0.0, 1.0) and family.kind == FamilyKind.HIT and report.certificate is None and exceptional:
            notes.append("zero modulus without a null-set certificate for this endpoint policy")
        return ExceptionalVerdict(
            exceptional=exceptional,
            modulus=report.objective,
            certificate=report.certificate if exceptional else None,
            notes=notes,
        )

    @staticmethod
    def combine_densities(densities: Sequence[ScalarField], p: float = 1.0) -> ScalarField:
        """(sum rho_i^p)^(1/p), admissible for the union of the families."""
        if not densities:
            raise InvalidParameter("At least one density is required")
        stacked = np.vstack([d.values for d in densities])
        return ScalarField.density(np.power(np.sum(np.power(stacked, p), axis=0), 1.0 / p))

    @staticmethod
    def keith_modulus_ladder(
        space: PointCloudSpace,
        x: int,
        y: int,
        L: float,
        p: float,
        eps_list: Sequence[float],
        fclass: Optional[FunctionClass] = None,
        lam: float = 0.5,
        settings: Optional[Settings] = None,
    ) -> List[LadderRung]:
        """
        Modulus of connect(x, y) against the pole-pair Riesz measure per scale.

        The class defaults to finite_at(x, y). Each rung also carries
        modulus * d(x, y)^(p - 1).
        """
        if x == y:
            raise InvalidParameter("The poles must be distinct", {"x": x, "y": y})
        if not eps_list:
            raise InvalidParameter("The scale list is empty")
        riesz = PoincareService.riesz_weights(space, x, y, L, settings=settings)
        fclass = fclass or FunctionClass.finite_at(x, y)
        distance = float(space.dist[x, y])

        rungs = []
        for eps in eps_list:
            report = ModulusService.chain_modulus(
                space, ChainFamily.connect(x, y), eps, p, riesz, fclass, lam, settings
            )
            rungs.append(LadderRung(
                eps=float(eps),
                objective=report.objective,
                status=report.status,
                scaled=report.objective * distance ** (p - 1.0),
                empty_family=report.empty_family,
            ))
        return rungs
