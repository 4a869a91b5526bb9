import logging
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from chainlab.core.config import Settings, settings as default_settings
from chainlab.core.errors import (
    DegenerateCurve,
    EndpointMismatch,
    InvalidParameter,
    ZeroLengthChain,
)
from chainlab.schemas.chain import Chain, ChainDocument, SampledChain, StepCurve
from chainlab.schemas.field import ScalarField
from chainlab.schemas.space import PointCloudSpace
from chainlab.utils.numeric import check_eps, check_lambda, eps_threshold, step_cost

logger = logging.getLogger(__name__)


class ChainService:
    """Chains as values: integrals, algebra, step curves and Riemann sums"""

    @staticmethod
    def chain_from_points(
        space: PointCloudSpace,
        ids: Sequence[Union[int, str]],
        eps: Optional[float] = None,
        settings: Optional[Settings] = None,
    ) -> Chain:
        """
        Validated chain on the space.

        Args:
            ids: point labels or indices, at least two
            eps: step bound; the largest step when omitted

        Raises:
            InvalidParameter: fewer than two points or a step above eps
        """
        settings = settings or default_settings
        try:
            points = tuple(space.index_of(q) for q in ids)
        except ValueError as e:
            raise InvalidParameter(str(e))
        if len(points) < 2:
            raise InvalidParameter("A chain needs at least one step", {"points": list(points)})

        steps = space.dist[points[:-1], points[1:]]
        if eps is None:
            eps = float(steps.max()) if steps.max() > 0 else 1.0
        eps = check_eps(eps)
        too_long = np.flatnonzero(steps > eps_threshold(eps, settings.EPS_REL_TOL))
        if too_long.size:
            k = int(too_long[0])
            raise InvalidParameter(
                f"Step {k} has length {steps[k]} above eps={eps}",
                {"step": k, "length": float(steps[k]), "eps": eps}
            )
        return Chain(points=points, eps=eps, steps=steps)

    @staticmethod
    def from_document(space: PointCloudSpace, document: ChainDocument, settings: Optional[Settings] = None) -> Chain:
        return ChainService.chain_from_points(space, document.points, document.eps, settings)

    @staticmethod
    def to_document(chain: Chain) -> ChainDocument:
        return ChainDocument(points=list(chain.points), eps=chain.eps)

    # ============= INTEGRALS =============

    @staticmethod
    def lambda_integral(c: Chain, g: ScalarField, lam: float = 0.5) -> float:
        """sum_i (lam * g(q_i) + (1 - lam) * g(q_{i+1})) * d(q_i, q_{i+1})"""
        lam = check_lambda(lam)
        points = np.asarray(c.points)
        costs = step_cost(g.values[points[:-1]], g.values[points[1:]], c.steps, lam)
        return float(np.sum(costs))

    @staticmethod
    def chain_integral(c: Chain, g: ScalarField) -> float:
        return ChainService.lambda_integral(c, g, 0.5)

    @staticmethod
    def node_coefficients(c: Chain, n: int, lam: float = 0.5) -> np.ndarray:
        """Vector a with lambda_integral(c, g) = a . g for finite g."""
        coefficients = np.zeros(n)
        points = np.asarray(c.points)
        np.add.at(coefficients, points[:-1], lam * c.steps)
        np.add.at(coefficients, points[1:], (1.0 - lam) * c.steps)
        return coefficients

    @staticmethod
    def length(c: Chain) -> float:
        return float(np.sum(c.steps))

    # ============= ALGEBRA =============

    @staticmethod
    def concat(c1: Chain, c2: Chain) -> Chain:
        """
        c1 followed by c2, sharing the junction point once.

        Raises:
            EndpointMismatch: c1 does not end where c2 starts
        """
        if c1.end != c2.start:
            raise EndpointMismatch(
                f"Chain ends at {c1.end} but the next starts at {c2.start}",
                {"end": c1.end, "start": c2.start}
            )
        return Chain(
            points=c1.points + c2.points[1:],
            eps=max(c1.eps, c2.eps),
            steps=np.concatenate([c1.steps, c2.steps]),
        )

    @staticmethod
    def inverse(c: Chain) -> Chain:
        return Chain(points=tuple(reversed(c.points)), eps=c.eps, steps=c.steps[::-1])

    # ============= CURVES =============

    @staticmethod
    def to_step_curve(c: Chain) -> StepCurve:
        """
        Step curve with breakpoints at normalized prefix lengths.

        Zero-length steps give empty intervals, which are dropped.

        Raises:
            ZeroLengthChain: all points coincide
        """
        total = ChainService.length(c)
        if total <= 0:
            raise ZeroLengthChain("Chain has zero length", {"points": list(c.points)})

        prefix = np.concatenate([[0.0], np.cumsum(c.steps)[:-1]]) / total
        breakpoints: List[float] = []
        values: List[int] = []
        for i, t in enumerate(prefix.tolist()):
            if c.steps[i] <= 0:
                continue
            breakpoints.append(t)
            values.append(c.points[i])
        breakpoints[0] = 0.0
        return StepCurve(breakpoints=tuple(breakpoints), values=tuple(values), terminal=c.end)

    @staticmethod
    def riemann_sum(
        f: Callable,
        t: float,
        n: int,
        lam: float = 0.5,
        ell: float = 1.0,
    ) -> float:
        """
        R_t(f, n) on [0, ell].

        Nodes 0, ell*t/n, ell*(t+1)/n, ..., ell*(t+n-1)/n, ell; each gap is
        weighted by [f(left), f(right)]_lam.
        """
        lam = check_lambda(lam)
        if not 0.0 <= t <= 1.0:
            raise InvalidParameter(f"t must lie in [0, 1], got {t}", {"t": t})
        if n < 1:
            raise InvalidParameter(f"n must be positive, got {n}", {"n": n})
        if ell <= 0:
            raise InvalidParameter(f"ell must be positive, got {ell}", {"ell": ell})

        nodes = np.concatenate([[0.0], ell * (t + np.arange(n)) / n, [ell]])
        values = ChainService._sample(f, nodes)
        return float(np.sum(step_cost(values[:-1], values[1:], np.diff(nodes), lam)))

    @staticmethod
    def _sample(f: Callable, nodes: np.ndarray) -> np.ndarray:
        try:
            values = np.asarray(f(nodes), dtype=float)
            if values.shape == nodes.shape:
                return values
            if values.ndim == 0:
                return np.full(nodes.shape, float(values))
        except (TypeError, ValueError):
            pass
        return np.array([float(f(s)) for s in nodes.tolist()])

    @staticmethod
    def sample_chain_from_curve(
        space: PointCloudSpace,
        curve: Sequence[Union[int, str]],
        t: float,
        n: int,
        settings: Optional[Settings] = None,
    ) -> SampledChain:
        """
        The (n+2)-point chain at arc-length parameters 0, L(t+i)/n, L.

        Each parameter snaps to the curve sample with the nearest cumulative
        arc length, ties to the smaller index.

        Raises:
            DegenerateCurve: the curve has zero length
        """
        if not 0.0 <= t <= 1.0:
            raise InvalidParameter(f"t must lie in [0, 1], got {t}", {"t": t})
        if n < 1:
            raise InvalidParameter(f"n must be positive, got {n}", {"n": n})
        try:
            samples = np.array([space.index_of(q) for q in curve], dtype=int)
        except ValueError as e:
            raise InvalidParameter(str(e))
        if samples.size < 2:
            raise DegenerateCurve("A curve needs at least two samples")

        arc = np.concatenate([[0.0], np.cumsum(space.dist[samples[:-1], samples[1:]])])
        total = float(arc[-1])
        if total <= 0:
            raise DegenerateCurve("Curve has zero length", {"samples": samples.tolist()})

        parameters = np.concatenate([[0.0], total * (t + np.arange(n)) / n, [total]])
        right = np.clip(np.searchsorted(arc, parameters, side="left"), 0, arc.size - 1)
        left = np.clip(right - 1, 0, arc.size - 1)
        use_left = np.abs(parameters - arc[left]) <= np.abs(arc[right] - parameters)
        snapped = np.where(use_left, left, right)

        points = samples[snapped]
        steps = space.dist[points[:-1], points[1:]]
        eps = float(steps.max()) if steps.max() > 0 else total / n
        chain = ChainService.chain_from_points(space, points.tolist(), eps, settings)
        return SampledChain(
            chain=chain,
            parameters=parameters.tolist(),
            snap_error=float(np.max(np.abs(parameters - arc[snapped]))),
        )
