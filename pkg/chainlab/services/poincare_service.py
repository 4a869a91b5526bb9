import logging
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np

from chainlab.core.config import Settings, settings as default_settings
from chainlab.core.errors import (
    InvalidParameter,
    NoChainWithinBudget,
    NotSeparating,
    ZeroBallMass,
)
from chainlab.schemas.field import ScalarField
from chainlab.schemas.poincare import (
    BMCAudit,
    BMCCandidate,
    MinkowskiProfile,
    PIAudit,
    PICase,
    PointwiseResult,
    ProfileEntry,
    RieszWeights,
    ShellWidth,
)
from chainlab.schemas.space import PointCloudSpace
from chainlab.services.space_service import SpaceService
from chainlab.utils.graph.shortest_path import constrained_shortest_chain, dijkstra
from chainlab.utils.numeric import check_eps, check_lambda, eps_threshold, safe_product, within

logger = logging.getLogger(__name__)

Measure = Optional[Union[ScalarField, RieszWeights]]


def _as_index_set(space: PointCloudSpace, points: Iterable) -> np.ndarray:
    ids = sorted({space.index_of(p) for p in points})
    return np.array(ids, dtype=int)


class PoincareService:
    """Medidas de Riesz e inecuaciones de Poincaré sobre cadenas"""

    # ============= MEASURES =============

    @staticmethod
    def measure_weights(space: PointCloudSpace, measure: Measure) -> np.ndarray:
        """Point masses of a measure given as a field, Riesz weights, or None for the space mass."""
        if measure is None:
            return np.asarray(space.mass, dtype=float)
        if isinstance(measure, RieszWeights):
            return measure.measure(space.mass)
        if measure.n != space.n:
            raise InvalidParameter("Measure must have one value per point")
        if (measure.values < 0).any() or not measure.is_finite():
            raise InvalidParameter("Measure must be finite and nonnegative")
        return np.asarray(measure.values, dtype=float)

    @staticmethod
    def riesz_weights(
        space: PointCloudSpace,
        x: int,
        y: int,
        L: float = 1.0,
        doubling_constant: Optional[float] = None,
        settings: Optional[Settings] = None,
    ) -> RieszWeights:
        """
        Truncated two-pole Riesz density.

        R(z) = d(x,z)/m(B_d(x,z)(x)) + d(y,z)/m(B_d(y,z)(y)) on
        B_{L d(x,y)}(x) union B_{L d(x,y)}(y), zero elsewhere and at the poles.

        Args:
            doubling_constant: when given, the bound 8 C_D L d(x, y) is attached

        Raises:
            ZeroBallMass: a ball in the formula has no mass
        """
        if x == y:
            raise InvalidParameter("The poles must be distinct", {"x": x, "y": y})
        if L < 1:
            raise InvalidParameter(f"L must be at least 1, got {L}", {"L": L})

        distance = float(space.dist[x, y])
        radius = L * distance
        region = (space.dist[x] < radius) | (space.dist[y] < radius)
        region[[x, y]] = False

        weights = np.zeros(space.n)
        for pole in (x, y):
            order = np.argsort(space.dist[pole], kind="stable")
            sorted_dist = space.dist[pole, order]
            cumulative = np.concatenate([[0.0], np.cumsum(space.mass[order])])
            targets = np.flatnonzero(region)
            radii = space.dist[pole, targets]
            ball_mass = cumulative[np.searchsorted(sorted_dist, radii, side="left")]
            empty = np.flatnonzero(ball_mass <= 0)
            if empty.size:
                z = int(targets[empty[0]])
                raise ZeroBallMass(
                    f"Ball of radius {radii[empty[0]]} around {pole} has zero mass",
                    {"center": pole, "radius": float(radii[empty[0]]), "point": z}
                )
            weights[targets] += radii / ball_mass

        total = float(np.sum(weights * space.mass))
        bound = 8.0 * doubling_constant * L * distance if doubling_constant is not None else None
        return RieszWeights(x=x, y=y, L=L, weights=weights, total_mass=total, bound=bound)

    # ============= BALL INEQUALITY =============

    @staticmethod
    def default_pi_radii(space: PointCloudSpace) -> List[float]:
        """Distinct pairwise distances and the midpoints between consecutive ones."""
        distances = SpaceService.default_radii(space)
        midpoints = [(a + b) / 2.0 for a, b in zip(distances, distances[1:])]
        return sorted(set(distances) | set(midpoints))

    @staticmethod
    def ball_pi_audit(
        space: PointCloudSpace,
        u: ScalarField,
        g: ScalarField,
        p: float = 1.0,
        dilation: float = 1.0,
        radii: Optional[Sequence[float]] = None,
        settings: Optional[Settings] = None,
    ) -> PIAudit:
        """
        Empirical constant of the ball inequality

            avg_B |u - avg_B u| <= C r (avg_{dilation B} g^p)^(1/p)

        over every center and radius. Balls of zero mass are skipped and
        listed; zero right-hand sides with a positive left side mark the
        audit unbounded.
        """
        settings = settings or default_settings
        if dilation < 1:
            raise InvalidParameter(f"dilation must be at least 1, got {dilation}")
        if p < 1:
            raise InvalidParameter(f"p must be at least 1, got {p}")
        radii = PoincareService.default_pi_radii(space) if radii is None else [float(r) for r in radii]
        if any(r <= 0 for r in radii):
            raise InvalidParameter("Radii must be positive")

        g_power = np.power(g.values, p)
        worst = 0.0
        witness = None
        unbounded = False
        cases: List[PICase] = []
        skipped = []
        tiny = settings.VERIFY_REL_TOL

        for x in range(space.n):
            for r in radii:
                ball = space.dist[x] < r
                mass = space.mass[ball]
                total = float(mass.sum())
                if total <= 0:
                    skipped.append((x, r))
                    continue
                values = u.values[ball]
                average = float(mass @ values) / total
                lhs = float(mass @ np.abs(values - average)) / total

                big = space.dist[x] < dilation * r
                big_total = float(space.mass[big].sum())
                g_average = float(np.sum(safe_product(space.mass[big], g_power[big]))) / big_total
                rhs = r * g_average ** (1.0 / p)

                if rhs > 0:
                    ratio = lhs / rhs
                elif lhs > tiny * max(1.0, float(np.max(np.abs(values)))):
                    ratio = float("inf")
                else:
                    ratio = 0.0
                case = PICase(center=x, radius=r, lhs=lhs, rhs=rhs, ratio=ratio)
                cases.append(case)
                if ratio == float("inf") and not unbounded:
                    unbounded = True
                    witness = case
                    worst = ratio
                elif not unbounded and ratio > worst:
                    worst = ratio
                    witness = case

        return PIAudit(
            worst_constant=worst,
            witness=witness,
            unbounded=unbounded,
            cases=cases,
            skipped=skipped,
            p=p,
            dilation=dilation,
        )

    # ============= POINTWISE INEQUALITY =============

    @staticmethod
    def joining_scale(space: PointCloudSpace, x: int, y: int, settings: Optional[Settings] = None) -> float:
        """Smallest eps among pairwise distances at which x and y share a chain component."""
        distances = SpaceService.default_radii(space)
        lo, hi = 0, len(distances) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if SpaceService.chain_components(space, distances[mid], settings).same_component(x, y):
                hi = mid
            else:
                lo = mid + 1
        return distances[lo]

    @staticmethod
    def pointwise_pi_check(
        space: PointCloudSpace,
        x: int,
        y: int,
        g: ScalarField,
        p: float = 1.0,
        C: float = 1.0,
        L: float = 1.0,
        lam: float = 0.5,
        eps: Optional[float] = None,
        time_budget_ms: Optional[int] = None,
        settings: Optional[Settings] = None,
    ) -> PointwiseResult:
        """
        Compare the cheapest length-constrained chain with the Riesz integral.

        lhs = (min lambda-integral of g over eps-chains x -> y with length
        <= C d(x, y))^p, by exact Pareto label-setting; eps defaults to the
        smallest scale joining x and y.
        rhs = C d(x, y)^(p - 1) sum g^p R m.

        Raises:
            NoChainWithinBudget: no chain fits the length budget
            ZeroBallMass: from the Riesz weights
        """
        settings = settings or default_settings
        lam = check_lambda(lam)
        if x == y:
            raise InvalidParameter("x and y must differ", {"x": x, "y": y})
        if not (np.isfinite(g.values[x]) and np.isfinite(g.values[y])):
            raise InvalidParameter("g must be finite at both endpoints")
        if C <= 0:
            raise InvalidParameter(f"C must be positive, got {C}")

        distance = float(space.dist[x, y])
        riesz = PoincareService.riesz_weights(space, x, y, L, settings=settings)
        rhs = C * distance ** (p - 1.0) * float(np.sum(safe_product(np.power(g.values, p), riesz.measure(space.mass))))

        if eps is None:
            eps = PoincareService.joining_scale(space, x, y, settings)
        eps = check_eps(eps)
        if not SpaceService.chain_components(space, eps, settings).same_component(x, y):
            return PointwiseResult(
                lhs=float("inf"), rhs=rhs, satisfied=False, eps=eps, component_mismatch=True
            )

        graph = SpaceService.build_epsilon_graph(space, eps, settings)
        budget = eps_threshold(C * distance, settings.EPS_REL_TOL)
        if time_budget_ms is None:
            time_budget_ms = settings.LABEL_TIME_BUDGET_MS
        result = constrained_shortest_chain(graph, g.values, lam, x, y, budget, time_budget_ms)

        if result.exact and not np.isfinite(result.cost):
            raise NoChainWithinBudget(
                f"No eps-chain from {x} to {y} has length at most {C} * d(x, y)",
                {"x": x, "y": y, "C": C, "eps": eps, "lhs": "inf"}
            )

        cost = result.cost if result.exact else result.lower_bound
        lhs = cost ** p
        return PointwiseResult(
            lhs=lhs,
            rhs=rhs,
            satisfied=result.exact and within(lhs, rhs, settings.VERIFY_REL_TOL),
            eps=eps,
            chain=result.chain,
            chain_length=result.length,
            exact=result.exact,
        )

    # ============= WIDTH AND CONTENT =============

    @staticmethod
    def chain_width(
        space: PointCloudSpace,
        x: int,
        y: int,
        A: Iterable,
        eps: float,
        settings: Optional[Settings] = None,
    ) -> float:
        """Cheapest lambda = 1/2 integral of chi_A over eps-chains from x to y; inf if none."""
        if x == y:
            raise InvalidParameter("x and y must differ", {"x": x, "y": y})
        indicator = np.zeros(space.n)
        indicator[_as_index_set(space, A)] = 1.0
        graph = SpaceService.build_epsilon_graph(space, eps, settings)
        result = dijkstra(graph, indicator, 0.5, {x: 0.0}, target=y)
        return float(result.distance[y])

    @staticmethod
    def shell(space: PointCloudSpace, A: Iterable, r: float) -> np.ndarray:
        """Points outside A at distance < r from A."""
        members = _as_index_set(space, A)
        if members.size == 0:
            return members
        gap = space.dist[members].min(axis=0)
        outside = np.ones(space.n, dtype=bool)
        outside[members] = False
        return np.flatnonzero(outside & (gap < r))

    @staticmethod
    def minkowski_profile(
        space: PointCloudSpace,
        A: Iterable,
        measure: Measure = None,
        radii: Optional[Sequence[float]] = None,
    ) -> MinkowskiProfile:
        """Shell measure over radius per r; the minimum stands in for the liminf."""
        A = list(A)
        weights = PoincareService.measure_weights(space, measure)
        radii = SpaceService.default_radii(space) if radii is None else [float(r) for r in radii]
        if not radii or any(r <= 0 for r in radii):
            raise InvalidParameter("Radii must be positive and nonempty")

        entries = []
        for r in radii:
            members = PoincareService.shell(space, A, r)
            shell_measure = float(weights[members].sum())
            entries.append(ProfileEntry(
                radius=r,
                shell_measure=shell_measure,
                value=shell_measure / r,
                empty=members.size == 0,
            ))
        return MinkowskiProfile(entries=entries, minimum=min(e.value for e in entries))

    @staticmethod
    def bmc_audit(
        space: PointCloudSpace,
        x: int,
        y: int,
        L: float,
        candidates: Sequence[Iterable],
        eps: float,
        radii: Optional[Sequence[float]] = None,
        settings: Optional[Settings] = None,
    ) -> BMCAudit:
        """
        Separating-set audit under the pole-pair Riesz measure.

        Each region must contain x with its open eps-ball and exclude y. For
        each shell B_r(region) minus region the chain width from x to y is set
        against the shell measure; worst_c is the smallest profile minimum and
        worst_C the largest width / measure ratio.

        Raises:
            NotSeparating: a region fails the containment conditions
        """
        settings = settings or default_settings
        eps = check_eps(eps)
        riesz = PoincareService.riesz_weights(space, x, y, L, settings=settings)
        weights = riesz.measure(space.mass)
        radii = SpaceService.default_radii(space) if radii is None else [float(r) for r in radii]

        audited = []
        worst_c = float("inf")
        worst_C = 0.0
        for candidate in candidates:
            region = _as_index_set(space, candidate)
            inside = np.zeros(space.n, dtype=bool)
            inside[region] = True
            if not inside[x]:
                raise NotSeparating(f"Region does not contain x={x}", {"condition": "contains_x"})
            if not inside[SpaceService.open_ball(space, x, eps)].all():
                raise NotSeparating(
                    f"Region does not contain the open {eps}-ball around x",
                    {"condition": "contains_ball"}
                )
            if inside[y]:
                raise NotSeparating(f"Region contains y={y}", {"condition": "excludes_y"})

            profile = PoincareService.minkowski_profile(space, region, riesz, radii)
            widths = []
            for r in radii:
                members = PoincareService.shell(space, region, r)
                width = PoincareService.chain_width(space, x, y, members, eps, settings)
                shell_measure = float(weights[members].sum())
                if shell_measure > 0:
                    ratio = width / shell_measure
                else:
                    ratio = 0.0 if width == 0 else float("inf")
                widths.append(ShellWidth(
                    radius=r,
                    shell_size=int(members.size),
                    width=width,
                    shell_measure=shell_measure,
                    ratio=ratio,
                    lower_bound=r - 2.0 * eps,
                ))
                worst_C = max(worst_C, ratio)

            worst_c = min(worst_c, profile.minimum)
            audited.append(BMCCandidate(
                region=tuple(region.tolist()),
                profile=profile,
                widths=widths,
                zero_entries=[e.radius for e in profile.entries if e.value == 0],
            ))

        return BMCAudit(worst_c=worst_c, worst_C=worst_C, candidates=audited)
