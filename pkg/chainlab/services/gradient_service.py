import logging
import time
from typing import List, Optional, Sequence

import networkx as nx
import numpy as np
from scipy import sparse

from chainlab.core.config import Settings, settings as default_settings
from chainlab.core.errors import InvalidParameter
from chainlab.schemas.field import ScalarField
from chainlab.schemas.report import (
    CurveConsistency,
    GradientProgram,
    LadderRung,
    SolveReport,
    SolveStatus,
    VerifyResult,
    Violation,
)
from chainlab.schemas.space import EpsilonGraph, PointCloudSpace
from chainlab.services.space_service import SpaceService
from chainlab.utils.numeric import check_eps, check_lambda, eps_threshold, lp_norm, step_cost, within
from chainlab.utils.solver.programs import (
    max_violation,
    solve_convex,
    solve_convex_from_start,
    solve_linear,
)

logger = logging.getLogger(__name__)


def _ordered_pairs(graph: EpsilonGraph):
    """Every ordered pair (i, j) of eps-neighbors with its distance."""
    sources = np.concatenate([np.full(len(nbrs), i, dtype=int) for i, nbrs in enumerate(graph.neighbors)])
    targets = np.concatenate([np.asarray(nbrs, dtype=int) for nbrs in graph.neighbors])
    lengths = np.concatenate(list(graph.lengths))
    return sources, targets, lengths


def _select_pairs(space: PointCloudSpace, graph: EpsilonGraph, lam: float, weak: bool):
    """
    Ordered pairs that carry a constraint.

    At lambda = 1/2 the signed inequality for (i, j) and (j, i) is one
    absolute inequality, so only i < j is kept and compared with |du|.
    """
    sources, targets, lengths = _ordered_pairs(graph)
    keep = np.ones(sources.size, dtype=bool)
    if lam == 0.5:
        keep &= sources < targets
    if weak:
        keep &= (space.mass[sources] > 0) & (space.mass[targets] > 0)
    return sources[keep], targets[keep], lengths[keep]


def _check_p(p: float) -> float:
    if not np.isfinite(p) or p < 1:
        raise InvalidParameter(f"p must be at least 1, got {p}", {"p": p})
    return float(p)


class GradientService:
    """Servicio de gradientes superiores sobre cadenas"""

    # ============= FIELDS =============

    @staticmethod
    def slope_field(
        space: PointCloudSpace,
        u: ScalarField,
        eps: float,
        settings: Optional[Settings] = None,
    ) -> ScalarField:
        """sup of |u(y) - u(x)| / d(x, y) over the closed eps-ball; 0 with no neighbors."""
        graph = SpaceService.build_epsilon_graph(space, eps, settings)
        slope = np.zeros(space.n)
        for i, (nbrs, lengths) in enumerate(zip(graph.neighbors, graph.lengths)):
            if nbrs.size:
                slope[i] = float(np.max(np.abs(u.values[nbrs] - u.values[i]) / lengths))
        return ScalarField.gradient(slope)

    @staticmethod
    def verify_upper_gradient(
        space: PointCloudSpace,
        u: ScalarField,
        g: ScalarField,
        eps: float,
        lam: float = 0.5,
        symmetric: bool = False,
        weak: bool = False,
        rel_tol: Optional[float] = None,
        settings: Optional[Settings] = None,
    ) -> VerifyResult:
        """
        Check every two-point chain within eps.

        Every ordered pair (x, y) must satisfy u(y) - u(x) <= [g(x), g(y)]_lam * d.
        symmetric also requires it for -u, i.e. |u(y) - u(x)| on both orders;
        at lam = 1/2 the two coincide.
        weak skips pairs touching a zero-mass point.
        Pairs where u is +inf at both ends are vacuous.
        """
        settings = settings or default_settings
        lam = check_lambda(lam)
        tol = settings.VERIFY_REL_TOL if rel_tol is None else rel_tol
        graph = SpaceService.build_epsilon_graph(space, eps, settings)
        sources, targets, lengths = _select_pairs(space, graph, lam, weak)

        with np.errstate(invalid="ignore"):
            increments = u.values[targets] - u.values[sources]
        if symmetric or lam == 0.5:
            increments = np.abs(increments)
        bounds = step_cost(g.values[sources], g.values[targets], lengths, lam)

        violations = []
        for k in range(sources.size):
            increment = float(increments[k])
            if np.isnan(increment):
                continue
            bound = float(bounds[k])
            if not within(increment, bound, tol):
                violations.append(Violation(
                    source=int(sources[k]),
                    target=int(targets[k]),
                    increment=increment,
                    bound=bound,
                    deficit=increment - bound,
                ))
        return VerifyResult(accepted=not violations, violations=violations, checked_pairs=int(sources.size))

    # ============= PROGRAMS =============

    @staticmethod
    def build_program(
        space: PointCloudSpace,
        u: ScalarField,
        eps: float,
        lam: float = 0.5,
        symmetric: bool = False,
        weak: bool = False,
        settings: Optional[Settings] = None,
    ) -> GradientProgram:
        """Two-point reduction; rows with a nonpositive right-hand side are dropped."""
        lam = check_lambda(lam)
        if not u.is_finite():
            raise InvalidParameter("The function must be finite to build a gradient program")
        graph = SpaceService.build_epsilon_graph(space, eps, settings)
        sources, targets, lengths = _select_pairs(space, graph, lam, weak)

        rhs = (u.values[targets] - u.values[sources]) / lengths
        if symmetric or lam == 0.5:
            rhs = np.abs(rhs)
        positive = rhs > 0
        rows = np.stack([sources[positive], targets[positive]], axis=1)
        coefficients = np.tile([lam, 1.0 - lam], (rows.shape[0], 1))
        return GradientProgram(
            n=space.n,
            rows=rows,
            coefficients=coefficients,
            rhs=rhs[positive],
            eps=graph.eps,
            lam=lam,
            symmetric=symmetric,
            weak=weak,
        )

    @staticmethod
    def solve_program(
        space: PointCloudSpace,
        program: GradientProgram,
        p: float = 1.0,
        start: Optional[ScalarField] = None,
        settings: Optional[Settings] = None,
    ) -> SolveReport:
        """
        Minimize sum m g^p subject to the program rows.

        The objective reported is the norm (sum m g^p)^(1/p). Only points that
        appear in some row become variables; the rest stay at 0. A leftover
        violation is removed by a uniform shift, since every row's
        coefficients sum to 1.
        """
        settings = settings or default_settings
        p = _check_p(p)
        started = time.time()

        if program.constraint_count == 0:
            return SolveReport(
                objective=0.0,
                argument=np.zeros(program.n),
                status=SolveStatus.OPTIMAL,
                constraint_count=0,
                dual_bound=0.0 if p == 1 else None,
                kkt_residual=None if p == 1 else 0.0,
                runtime_ms=(time.time() - started) * 1000.0,
            )

        active, local = np.unique(program.rows, return_inverse=True)
        local = local.reshape(program.rows.shape)
        m = program.constraint_count
        A = sparse.csr_matrix(
            (program.coefficients.ravel(), (np.repeat(np.arange(m), 2), local.ravel())),
            shape=(m, active.size),
        )
        w = space.mass[active]
        b = program.rhs

        if p == 1.0:
            solution = solve_linear(w, A, b, None, settings)
        elif start is not None:
            solution = solve_convex_from_start(w, p, A, b, start.values[active], settings)
        else:
            solution = solve_convex(w, p, A, b, None, settings)

        x = solution.x
        shift = max_violation(A, b, x)
        if shift > 0:
            x = x + shift
        violation = max_violation(A, b, x)

        g = np.zeros(program.n)
        g[active] = x
        objective = lp_norm(g, space.mass, p)

        if p == 1.0:
            gap = abs(objective - solution.dual_bound)
            optimal = violation <= settings.FEAS_TOL and gap <= settings.FEAS_TOL * max(1.0, abs(objective))
        else:
            optimal = violation <= settings.FEAS_TOL and solution.kkt_residual <= settings.KKT_TOL

        report = SolveReport(
            objective=objective,
            argument=g,
            max_violation=violation,
            iterations=1,
            cuts=m,
            status=SolveStatus.OPTIMAL if optimal else SolveStatus.TOLERANCE_REACHED,
            constraint_count=m,
            dual_bound=solution.dual_bound,
            kkt_residual=solution.kkt_residual,
            runtime_ms=(time.time() - started) * 1000.0,
        )
        logger.info(
            "Gradient program: %d rows, %d variables, p=%g, objective %.12g, status %s",
            m, active.size, p, objective, report.status.value
        )
        return report

    @staticmethod
    def minimal_gradient(
        space: PointCloudSpace,
        u: ScalarField,
        eps: float,
        p: float = 1.0,
        lam: float = 0.5,
        symmetric: bool = False,
        start: Optional[ScalarField] = None,
        settings: Optional[Settings] = None,
    ) -> SolveReport:
        """
        Minimal L^p(m) eps-upper gradient.

        Args:
            start: feasible start for the SLSQP back-end (p > 1 only)

        Returns:
            SolveReport with the norm as objective and g* as argument
        """
        program = GradientService.build_program(space, u, eps, lam, symmetric, False, settings)
        return GradientService.solve_program(space, program, p, start, settings)

    @staticmethod
    def minimal_weak_gradient(
        space: PointCloudSpace,
        u: ScalarField,
        eps: float,
        p: float = 1.0,
        lam: float = 0.5,
        symmetric: bool = False,
        settings: Optional[Settings] = None,
    ) -> SolveReport:
        """Same program without pairs touching zero-mass points."""
        program = GradientService.build_program(space, u, eps, lam, symmetric, True, settings)
        report = GradientService.solve_program(space, program, p, None, settings)
        dropped = int((space.mass == 0).sum())
        if dropped:
            report.notes.append(f"{dropped} zero-mass points excluded from the constraints")
        return report

    @staticmethod
    def energy_ladder(
        space: PointCloudSpace,
        u: ScalarField,
        eps_list: Sequence[float],
        p: float = 1.0,
        lam: float = 0.5,
        symmetric: bool = False,
        settings: Optional[Settings] = None,
    ) -> List[LadderRung]:
        """Minimal objectives along a decreasing scale list; nonincreasing up to tolerance."""
        eps_list = [check_eps(e) for e in eps_list]
        if not eps_list:
            raise InvalidParameter("The scale list is empty")
        if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
            raise InvalidParameter("Scales must be strictly decreasing", {"eps": eps_list})

        rungs = []
        for eps in eps_list:
            report = GradientService.minimal_gradient(space, u, eps, p, lam, symmetric, None, settings)
            rungs.append(LadderRung(eps=eps, objective=report.objective, status=report.status))
        return rungs

    # ============= CONSISTENCY AND BOUNDS =============

    @staticmethod
    def check_curve_consistency(
        space: PointCloudSpace,
        u: ScalarField,
        g: ScalarField,
        eps: float,
        seed: Optional[int] = None,
        settings: Optional[Settings] = None,
    ) -> CurveConsistency:
        """
        Path integrals (lambda = 1/2) dominate |u(end) - u(start)|.

        Simple paths of the eps-graph are enumerated for small spaces and
        sampled by self-avoiding random walks otherwise. Paths with an
        infinite-g endpoint are skipped.
        """
        settings = settings or default_settings
        graph = SpaceService.build_epsilon_graph(space, eps, settings)
        nx_graph = nx.Graph()
        nx_graph.add_nodes_from(range(space.n))
        nx_graph.add_edges_from(graph.edges())
        finite = np.isfinite(g.values)

        def path_deficit(path):
            points = np.asarray(path)
            lengths = space.dist[points[:-1], points[1:]]
            integral = float(np.sum(step_cost(g.values[points[:-1]], g.values[points[1:]], lengths, 0.5)))
            increment = abs(float(u.values[path[-1]] - u.values[path[0]]))
            if within(increment, integral, settings.VERIFY_REL_TOL):
                return 0.0
            return increment - integral

        checked = 0
        exhaustive = space.n <= settings.PATH_ENUMERATION_MAX_N
        if exhaustive:
            for a in range(space.n):
                for b in range(a + 1, space.n):
                    if not (finite[a] and finite[b]):
                        continue
                    for path in nx.all_simple_paths(nx_graph, a, b):
                        checked += 1
                        deficit = path_deficit(path)
                        if deficit > 0:
                            return CurveConsistency(
                                consistent=False, checked_paths=checked, exhaustive=True,
                                counterexample=tuple(path), deficit=deficit
                            )
        else:
            rng = np.random.default_rng(settings.DEFAULT_SEED if seed is None else seed)
            starts = np.flatnonzero(finite)
            for _ in range(settings.RANDOM_WALK_SAMPLES if starts.size else 0):
                path = [int(rng.choice(starts))]
                visited = {path[0]}
                for _ in range(int(rng.integers(1, space.n))):
                    options = [v for v in nx_graph.neighbors(path[-1]) if v not in visited]
                    if not options:
                        break
                    path.append(int(options[rng.integers(len(options))]))
                    visited.add(path[-1])
                if len(path) < 2 or not finite[path[-1]]:
                    continue
                checked += 1
                deficit = path_deficit(path)
                if deficit > 0:
                    return CurveConsistency(
                        consistent=False, checked_paths=checked, exhaustive=False,
                        counterexample=tuple(path), deficit=deficit
                    )

        return CurveConsistency(consistent=True, checked_paths=checked, exhaustive=exhaustive)

    @staticmethod
    def slope_bound_check(
        space: PointCloudSpace,
        u: ScalarField,
        g: ScalarField,
        eps: float,
        eps_prime: float,
        settings: Optional[Settings] = None,
    ) -> ScalarField:
        """
        Per-point margin sup_{closed eps'-ball} g - sl_{eps'} u.

        Nonnegative whenever g is an eps-upper gradient and eps' <= eps.
        """
        settings = settings or default_settings
        eps = check_eps(eps)
        eps_prime = check_eps(eps_prime)
        if eps_prime > eps:
            raise InvalidParameter("eps_prime must not exceed eps", {"eps": eps, "eps_prime": eps_prime})
        slope = GradientService.slope_field(space, u, eps_prime, settings)
        threshold = eps_threshold(eps_prime, settings.EPS_REL_TOL)
        ball_sup = np.array([
            float(np.max(g.values[space.dist[i] <= threshold])) for i in range(space.n)
        ])
        with np.errstate(invalid="ignore"):
            margins = ball_sup - slope.values
        return ScalarField.function(np.where(np.isnan(margins), np.inf, margins))

    @staticmethod
    def upgrade_weak_gradient(
        space: PointCloudSpace,
        u: ScalarField,
        g: ScalarField,
        eps: float,
        lam: float = 0.5,
        symmetric: bool = False,
        settings: Optional[Settings] = None,
    ) -> ScalarField:
        """
        Set g = +inf on zero-mass endpoints of violated pairs.

        The L^p(m) norm is unchanged. For lambda in {0, 1} an infinite value
        at a step's zero-weight end does not help, so some weak gradients
        cannot be upgraded.

        Raises:
            InvalidParameter: a violation survives the upgrade
        """
        result = GradientService.verify_upper_gradient(space, u, g, eps, lam, symmetric, False, None, settings)
        values = g.values.copy()
        for violation in result.violations:
            for point in (violation.source, violation.target):
                if space.mass[point] == 0:
                    values[point] = np.inf
        upgraded = ScalarField.gradient(values)

        check = GradientService.verify_upper_gradient(space, u, upgraded, eps, lam, symmetric, False, None, settings)
        if not check.accepted:
            worst = check.violations[0]
            raise InvalidParameter(
                "Field is not a weak upper gradient that can be upgraded",
                {"source": worst.source, "target": worst.target, "deficit": worst.deficit}
            )
        return upgraded

    @staticmethod
    def sobolev_norm(
        space: PointCloudSpace,
        u: ScalarField,
        eps: float,
        p: float = 1.0,
        lam: float = 0.5,
        settings: Optional[Settings] = None,
    ) -> float:
        """(||u||_p^p + E_eps(u)^p)^(1/p) with E_eps the minimal energy."""
        p = _check_p(p)
        energy = GradientService.minimal_gradient(space, u, eps, p, lam, settings=settings).objective
        u_norm = lp_norm(u.values, space.mass, p)
        return float((u_norm ** p + energy ** p) ** (1.0 / p))
