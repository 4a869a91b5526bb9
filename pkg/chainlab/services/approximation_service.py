import logging
import time
from typing import Callable, List, Literal, Optional, Sequence

import numpy as np

from chainlab.core.config import Settings, settings as default_settings
from chainlab.core.errors import EmptySeedSet, InvalidParameter
from chainlab.schemas.field import ScalarField
from chainlab.schemas.potential import EBPipelineReport, EBRow, PotentialSpec
from chainlab.schemas.report import VerifyResult
from chainlab.schemas.space import GridDescriptor, MassRule, PointCloudSpace
from chainlab.services.gradient_service import GradientService
from chainlab.services.space_service import SpaceService
from chainlab.utils.graph.shortest_path import dijkstra
from chainlab.utils.numeric import check_eps, check_lambda, lp_norm, safe_product

logger = logging.getLogger(__name__)

POTENTIAL_CHECK_REL_TOL = 1e-12


class ApproximationService:
    """Potenciales de cadena y aproximación de funciones de Sobolev"""

    @staticmethod
    def chain_potential(
        space: PointCloudSpace,
        spec: PotentialSpec,
        settings: Optional[Settings] = None,
    ) -> ScalarField:
        """
        P(y) = min over seeds a and eps-chains a -> y of u_A(a) + integral of g.

        Duplicate seeds keep their smallest value. With a cap M the result is
        min(M, P) and unreachable points take M; without a cap they stay +inf.

        Raises:
            EmptySeedSet: no seeds
            InvalidParameter: a seed value is not finite
        """
        if not spec.seeds:
            raise EmptySeedSet("The seed set is empty")
        if spec.g.n != space.n:
            raise InvalidParameter("g must have one value per point")
        values = np.asarray(spec.seed_values, dtype=float)
        if not np.isfinite(values).all():
            raise InvalidParameter("Seed values must be finite", {"seed_values": values.tolist()})

        sources = {}
        for seed, value in zip(spec.seeds, values.tolist()):
            seed = space.index_of(seed)
            sources[seed] = min(value, sources.get(seed, float("inf")))

        graph = SpaceService.build_epsilon_graph(space, spec.eps, settings)
        potential = dijkstra(graph, spec.g.values, check_lambda(spec.lam), sources).distance
        if spec.cap is not None:
            potential = np.minimum(potential, spec.cap)
        return ScalarField.function(potential)

    @staticmethod
    def potential_gradient_check(
        space: PointCloudSpace,
        spec: PotentialSpec,
        rel_tol: float = POTENTIAL_CHECK_REL_TOL,
        settings: Optional[Settings] = None,
    ) -> VerifyResult:
        """g must be an (eps, lambda)-upper gradient of the potential."""
        potential = ApproximationService.chain_potential(space, spec, settings)
        return GradientService.verify_upper_gradient(
            space,
            potential,
            spec.g,
            spec.eps,
            lam=spec.lam,
            rel_tol=rel_tol,
            settings=settings,
        )

    @staticmethod
    def leibniz_gradient(
        space: PointCloudSpace,
        u: ScalarField,
        phi: ScalarField,
        g: ScalarField,
        eps: float,
        settings: Optional[Settings] = None,
    ) -> ScalarField:
        """
        |u| sl_eps(phi) + Q_eps(phi) g, an eps-upper gradient of u phi.

        Q_eps(phi)(x) is the largest |phi| on the closed eps-ball around x.
        """
        eps = check_eps(eps)
        if not (u.is_finite() and phi.is_finite()):
            raise InvalidParameter("u and phi must be finite")
        slope = GradientService.slope_field(space, phi, eps, settings).values
        graph = SpaceService.build_epsilon_graph(space, eps, settings)
        envelope = np.abs(phi.values).copy()
        for i, nbrs in enumerate(graph.neighbors):
            if nbrs.size:
                envelope[i] = max(envelope[i], float(np.max(np.abs(phi.values[nbrs]))))
        return ScalarField.gradient(safe_product(np.abs(u.values), slope) + safe_product(envelope, g.values))

    @staticmethod
    def eb_pipeline(
        sizes: Sequence[int],
        u: Callable[[np.ndarray], np.ndarray],
        g: Callable[[np.ndarray], np.ndarray],
        p: float = 1.0,
        eps_factor: float = 2.0,
        seeds: Literal["full", "boundary"] = "full",
        lam: float = 0.5,
        settings: Optional[Settings] = None,
    ) -> EBPipelineReport:
        """
        Approximate (u, g) on [0, 1] by chain potentials on refining grids.

        For each N the grid has N + 1 points at spacing 1/N with uniform mass
        and eps = eps_factor / N. Seeds are every point ("full") or the two
        endpoints ("boundary") with the values of u. Each row reports
        ||P - u||_p, ||sl_eps P - g||_p, the energy ||sl_eps P||_p and
        whether g passes as an upper gradient of P.
        """
        settings = settings or default_settings
        if not sizes or any(int(n) < 1 for n in sizes):
            raise InvalidParameter("Sizes must be positive integers", {"sizes": list(sizes)})
        if eps_factor < 1:
            raise InvalidParameter(f"eps_factor must be at least 1, got {eps_factor}")
        if seeds not in ("full", "boundary"):
            raise InvalidParameter(f"Unknown seed mode {seeds!r}")

        rows: List[EBRow] = []
        for n in sizes:
            n = int(n)
            started = time.time()
            space = SpaceService.generate_space(
                GridDescriptor(dim=1, side=n + 1, spacing=1.0 / n, mass_rule=MassRule.UNIFORM),
                settings,
            )
            x = space.coords[:, 0]
            u_values = np.broadcast_to(np.asarray(u(x), dtype=float), x.shape)
            g_field = ScalarField.gradient(np.broadcast_to(np.asarray(g(x), dtype=float), x.shape))
            seed_ids = tuple(range(n + 1)) if seeds == "full" else (0, n)
            spec = PotentialSpec(
                seeds=seed_ids,
                seed_values=tuple(float(u_values[i]) for i in seed_ids),
                g=g_field,
                eps=eps_factor / n,
                lam=lam,
            )

            potential = ApproximationService.chain_potential(space, spec, settings)
            slope = GradientService.slope_field(space, potential, spec.eps, settings)
            verified = ApproximationService.potential_gradient_check(space, spec, settings=settings).accepted
            rows.append(EBRow(
                n=n,
                eps=spec.eps,
                u_error=lp_norm(potential.values - u_values, space.mass, p),
                g_error=lp_norm(slope.values - g_field.values, space.mass, p),
                g_energy=lp_norm(slope.values, space.mass, p),
                verified=verified,
            ))
            logger.debug("eb_pipeline N=%d done in %.3fs", n, time.time() - started)

        return EBPipelineReport(p=p, seeds=seeds, rows=rows)
