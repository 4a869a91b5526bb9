import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
from pydantic import ValidationError
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import cdist

from chainlab.core.config import Settings, settings as default_settings
from chainlab.core.errors import (
    AlphaOutOfRange,
    BadDescriptor,
    ConfigParse,
    EmptyRadiusGrid,
    InvalidParameter,
)
from chainlab.schemas.space import (
    ComponentPartition,
    DoublingEstimate,
    EpsilonGraph,
    GeneratorDescriptor,
    GridDescriptor,
    PointCloudSpace,
    PointDocument,
    PuncturedGridDescriptor,
    SpaceDocument,
    TwoSequenceDescriptor,
)
from chainlab.utils import io
from chainlab.utils.numeric import check_eps, eps_threshold
from chainlab.utils.space.generators import grid_points, punctured_grid_points, two_sequence_points
from chainlab.utils.space.validators import SpaceValidator

logger = logging.getLogger(__name__)


class SpaceService:
    """Servicio de espacios métricos finitos"""

    # ============= CONSTRUCTION =============

    @staticmethod
    def build(
        dist,
        mass,
        labels: Optional[Sequence[str]] = None,
        coords=None,
        settings: Optional[Settings] = None,
    ) -> PointCloudSpace:
        """
        Validate and freeze a space.

        Raises:
            NonSymmetricDistance, TriangleViolation, NegativeMass, ZeroTotalMass
        """
        settings = settings or default_settings
        dist = np.asarray(dist, dtype=float)
        mass = np.asarray(mass, dtype=float)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1] or dist.shape[0] != mass.shape[0]:
            raise ConfigParse(
                f"Distance matrix {dist.shape} does not match {mass.shape[0]} masses",
                {"dist_shape": list(dist.shape), "n": int(mass.shape[0])}
            )
        SpaceValidator.validate_space(dist, mass, settings)
        return PointCloudSpace(
            dist=dist,
            mass=mass,
            labels=tuple(labels) if labels is not None else None,
            coords=coords,
        )

    @staticmethod
    def from_coords(
        coords,
        mass,
        labels: Optional[Sequence[str]] = None,
        settings: Optional[Settings] = None,
    ) -> PointCloudSpace:
        coords = np.asarray(coords, dtype=float)
        if coords.ndim == 1:
            coords = coords.reshape(-1, 1)
        return SpaceService.build(cdist(coords, coords), mass, labels, coords, settings)

    @staticmethod
    def from_document(document: SpaceDocument, settings: Optional[Settings] = None) -> PointCloudSpace:
        labels = [p.id for p in document.points]
        mass = [p.mass for p in document.points]
        if document.metric == "euclidean":
            return SpaceService.from_coords([p.coords for p in document.points], mass, labels, settings)
        coords = None
        if all(p.coords is not None for p in document.points):
            coords = [p.coords for p in document.points]
        return SpaceService.build(document.metric.matrix, mass, labels, coords, settings)

    @staticmethod
    def load_space(
        source: Union[str, Path, dict, SpaceDocument],
        masses: Optional[Union[str, Path]] = None,
        settings: Optional[Settings] = None,
    ) -> PointCloudSpace:
        """
        Load a point-cloud document.

        Args:
            source: JSON/CSV path, parsed JSON dict, or a SpaceDocument
            masses: masses file when source is an n x n distance matrix CSV

        Returns:
            Validated PointCloudSpace
        """
        if isinstance(source, SpaceDocument):
            return SpaceService.from_document(source, settings)
        if isinstance(source, dict):
            try:
                return SpaceService.from_document(SpaceDocument.model_validate(source), settings)
            except ValidationError as e:
                raise ConfigParse("Point-cloud document does not match the schema", {"errors": e.errors(include_url=False)})

        path = Path(source)
        if path.suffix.lower() == ".json":
            return SpaceService.load_space(io.read_json(path), settings=settings)
        if masses is not None:
            return SpaceService.build(io.read_matrix_csv(path), io.read_vector(masses), settings=settings)
        return SpaceService._from_point_csv(path, settings)

    @staticmethod
    def _from_point_csv(path: Path, settings: Optional[Settings]) -> PointCloudSpace:
        rows = io.read_csv_rows(path)
        header = [h.strip().lower() for h in rows[0]]
        if header[:2] != ["id", "mass"] or len(header) < 3:
            raise ConfigParse(
                f"Point CSV needs a header id,mass,x0,...: {path}",
                {"path": str(path), "header": rows[0]}
            )
        points = [
            PointDocument(
                id=row[0],
                mass=io.parse_float(row[1], path),
                coords=[io.parse_float(c, path) for c in row[2:]],
            )
            for row in rows[1:]
        ]
        try:
            document = SpaceDocument(points=points, metric="euclidean")
        except ValidationError as e:
            raise ConfigParse(f"Point CSV rows are inconsistent: {path}", {"errors": e.errors(include_url=False)})
        return SpaceService.from_document(document, settings)

    @staticmethod
    def to_document(space: PointCloudSpace) -> SpaceDocument:
        """Explicit-matrix document; coords are kept when present."""
        points = [
            PointDocument(
                id=space.label_of(i),
                mass=float(space.mass[i]),
                coords=space.coords[i].tolist() if space.coords is not None else None,
            )
            for i in range(space.n)
        ]
        return SpaceDocument(points=points, metric={"matrix": space.dist.tolist()})

    # ============= GENERATORS =============

    @staticmethod
    def generate_space(
        descriptor: Union[GeneratorDescriptor, dict],
        settings: Optional[Settings] = None,
    ) -> PointCloudSpace:
        """Build a grid, two-sequence or punctured-grid space from its descriptor."""
        if isinstance(descriptor, dict):
            descriptor = SpaceService.parse_descriptor(descriptor)

        if isinstance(descriptor, GridDescriptor):
            coords, mass, labels = grid_points(descriptor)
        elif isinstance(descriptor, TwoSequenceDescriptor):
            coords, mass, labels = two_sequence_points(descriptor)
        elif isinstance(descriptor, PuncturedGridDescriptor):
            coords, mass, labels = punctured_grid_points(descriptor)
        else:
            raise BadDescriptor(f"Unknown descriptor {type(descriptor).__name__}")

        logger.debug("Generated %s space with %d points", descriptor.kind, mass.size)
        return SpaceService.from_coords(coords, mass, labels, settings)

    @staticmethod
    def parse_descriptor(data: dict) -> GeneratorDescriptor:
        kinds = {
            "grid": GridDescriptor,
            "two_sequence": TwoSequenceDescriptor,
            "punctured_grid": PuncturedGridDescriptor,
        }
        kind = data.get("kind")
        if kind not in kinds:
            raise BadDescriptor(f"Unknown generator kind {kind!r}", {"kinds": sorted(kinds)})
        try:
            return kinds[kind].model_validate(data)
        except ValidationError as e:
            raise BadDescriptor(f"Invalid {kind} descriptor", {"errors": e.errors(include_url=False)})

    @staticmethod
    def snowflake(space: PointCloudSpace, alpha: float, settings: Optional[Settings] = None) -> PointCloudSpace:
        """d -> d^alpha; masses, labels and coords carried over."""
        if not 0.0 < alpha < 1.0:
            raise AlphaOutOfRange(f"alpha must lie in (0, 1), got {alpha}", {"alpha": alpha})
        return SpaceService.build(
            np.power(space.dist, alpha),
            space.mass,
            space.labels,
            space.coords,
            settings,
        )

    @staticmethod
    def remove_points(space: PointCloudSpace, ids: Iterable[int], settings: Optional[Settings] = None) -> PointCloudSpace:
        """Restriction to the complement of ids."""
        drop = set(int(i) for i in ids)
        keep = np.array([i for i in range(space.n) if i not in drop], dtype=int)
        if keep.size == 0:
            raise InvalidParameter("Cannot remove every point")
        return SpaceService.build(
            space.dist[np.ix_(keep, keep)],
            space.mass[keep],
            [space.labels[i] for i in keep] if space.labels is not None else None,
            space.coords[keep] if space.coords is not None else None,
            settings,
        )

    # ============= GRAPHS AND COMPONENTS =============

    @staticmethod
    def build_epsilon_graph(
        space: PointCloudSpace,
        eps: float,
        settings: Optional[Settings] = None,
    ) -> EpsilonGraph:
        settings = settings or default_settings
        eps = check_eps(eps)
        threshold = eps_threshold(eps, settings.EPS_REL_TOL)
        adjacent = (space.dist > 0) & (space.dist <= threshold)
        neighbors = []
        lengths = []
        for i in range(space.n):
            nbrs = np.flatnonzero(adjacent[i])
            nbrs.setflags(write=False)
            row = space.dist[i, nbrs].copy()
            row.setflags(write=False)
            neighbors.append(nbrs)
            lengths.append(row)
        return EpsilonGraph(eps=eps, neighbors=tuple(neighbors), lengths=tuple(lengths))

    @staticmethod
    def adjacency_matrix(graph: EpsilonGraph) -> sparse.csr_matrix:
        rows = np.concatenate([np.full(len(nbrs), i) for i, nbrs in enumerate(graph.neighbors)] or [np.zeros(0)])
        cols = np.concatenate(list(graph.neighbors) or [np.zeros(0)])
        data = np.concatenate(list(graph.lengths) or [np.zeros(0)])
        return sparse.csr_matrix((data, (rows.astype(int), cols.astype(int))), shape=(graph.n, graph.n))

    @staticmethod
    def chain_components(
        space: PointCloudSpace,
        eps: float,
        settings: Optional[Settings] = None,
    ) -> ComponentPartition:
        """Connected components of the eps-graph, numbered in order of their smallest point."""
        graph = SpaceService.build_epsilon_graph(space, eps, settings)
        _, raw = connected_components(SpaceService.adjacency_matrix(graph), directed=False)

        relabel = {}
        for label in raw.tolist():
            relabel.setdefault(label, len(relabel))
        component_of = np.array([relabel[label] for label in raw.tolist()], dtype=int)
        component_of.setflags(write=False)
        components = tuple(
            frozenset(np.flatnonzero(component_of == k).tolist()) for k in range(len(relabel))
        )

        different = component_of[:, None] != component_of[None, :]
        min_gap = float(space.dist[different].min()) if different.any() else float("inf")

        logger.debug("eps=%g splits %d points into %d components", eps, space.n, len(components))
        return ComponentPartition(
            eps=graph.eps,
            component_of=component_of,
            components=components,
            min_gap=min_gap,
        )

    @staticmethod
    def refines(fine: ComponentPartition, coarse: ComponentPartition) -> bool:
        """True when every fine component sits inside one coarse component."""
        return all(
            len({int(coarse.component_of[i]) for i in component}) == 1
            for component in fine.components
        )

    # ============= BALLS AND DOUBLING =============

    @staticmethod
    def open_ball(space: PointCloudSpace, x: int, r: float) -> np.ndarray:
        return np.flatnonzero(space.dist[x] < r)

    @staticmethod
    def closed_ball(space: PointCloudSpace, x: int, r: float, settings: Optional[Settings] = None) -> np.ndarray:
        settings = settings or default_settings
        return np.flatnonzero(space.dist[x] <= eps_threshold(r, settings.EPS_REL_TOL))

    @staticmethod
    def ball_mass(space: PointCloudSpace, x: int, r: float) -> float:
        return float(space.mass[space.dist[x] < r].sum())

    @staticmethod
    def default_radii(space: PointCloudSpace) -> List[float]:
        """Distinct positive pairwise distances."""
        upper = space.dist[np.triu_indices(space.n, k=1)]
        return sorted(set(upper.tolist()))

    @staticmethod
    def doubling_constant(
        space: PointCloudSpace,
        radii: Optional[Sequence[float]] = None,
    ) -> DoublingEstimate:
        """
        max over centers and radii of m(B_2r(x)) / m(B_r(x)) for open balls.

        Pairs with m(B_r(x)) = 0 are skipped and listed.

        Raises:
            EmptyRadiusGrid: radii given but empty
        """
        if radii is None:
            radii = SpaceService.default_radii(space) or [1.0]
        radii = [float(r) for r in radii]
        if not radii:
            raise EmptyRadiusGrid("At least one radius is required")
        if any(r <= 0 for r in radii):
            raise InvalidParameter("Radii must be positive", {"radii": radii})

        r_values = np.array(radii)
        order = np.argsort(space.dist, axis=1, kind="stable")
        sorted_dist = np.take_along_axis(space.dist, order, axis=1)
        cumulative = np.concatenate(
            [np.zeros((space.n, 1)), np.cumsum(space.mass[order], axis=1)], axis=1
        )

        best = 1.0
        witness_center = None
        witness_radius = None
        skipped = []
        for x in range(space.n):
            inner = cumulative[x, np.searchsorted(sorted_dist[x], r_values, side="left")]
            outer = cumulative[x, np.searchsorted(sorted_dist[x], 2.0 * r_values, side="left")]
            for k in np.flatnonzero(inner <= 0).tolist():
                skipped.append((x, radii[k]))
            valid = inner > 0
            if not valid.any():
                continue
            ratios = np.where(valid, outer / np.where(valid, inner, 1.0), 0.0)
            k = int(np.argmax(ratios))
            if ratios[k] > best:
                best = float(ratios[k])
                witness_center = x
                witness_radius = radii[k]

        return DoublingEstimate(
            constant=best,
            witness_center=witness_center,
            witness_radius=witness_radius,
            skipped=skipped,
        )
