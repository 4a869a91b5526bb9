import logging
from typing import Optional

import numpy as np

from chainlab.core.config import Settings, settings as default_settings
from chainlab.core.errors import (
    DegenerateDistance,
    NegativeMass,
    NonSymmetricDistance,
    TriangleViolation,
    ZeroTotalMass,
)

logger = logging.getLogger(__name__)


class SpaceValidator:
    """Metric space validation helpers"""

    @staticmethod
    def validate_finite(dist: np.ndarray, mass: np.ndarray):
        """Validate no NaN or infinite entries"""
        if not np.isfinite(dist).all():
            raise DegenerateDistance("Distance matrix has non-finite entries")
        if not np.isfinite(mass).all():
            raise NegativeMass("Mass vector has non-finite entries")

    @staticmethod
    def validate_symmetry(dist: np.ndarray, settings: Settings):
        """Validate d(x, y) == d(y, x) up to tolerance"""
        gap = np.abs(dist - dist.T)
        allowed = settings.METRIC_ABS_TOL + settings.METRIC_REL_TOL * np.maximum(dist, dist.T)
        excess = gap - allowed
        if (excess > 0).any():
            i, j = np.unravel_index(int(np.argmax(excess)), excess.shape)
            raise NonSymmetricDistance(
                f"d({i},{j}) = {dist[i, j]} but d({j},{i}) = {dist[j, i]}",
                {"pair": [int(i), int(j)], "gap": float(gap[i, j])}
            )

    @staticmethod
    def validate_separation(dist: np.ndarray, settings: Settings):
        """Validate zero diagonal and positive distances between distinct points"""
        diagonal = np.abs(np.diag(dist))
        if (diagonal > settings.METRIC_ABS_TOL).any():
            i = int(np.argmax(diagonal))
            raise DegenerateDistance(f"d({i},{i}) = {dist[i, i]} is not zero", {"point": i})
        off = dist + np.eye(dist.shape[0])
        if (off <= 0).any():
            i, j = np.argwhere(off <= 0)[0]
            raise DegenerateDistance(
                f"Distinct points {i} and {j} are at distance {dist[i, j]}",
                {"pair": [int(i), int(j)]}
            )

    @staticmethod
    def validate_triangle(dist: np.ndarray, settings: Settings, seed: Optional[int] = None):
        """
        Validate d(x, z) <= d(x, y) + d(y, z).

        Exhaustive up to TRIANGLE_EXHAUSTIVE_MAX_N points, a seeded sample of
        TRIANGLE_SAMPLE_SIZE triples above it.
        """
        n = dist.shape[0]
        worst = 0.0
        witness = None

        if n <= settings.TRIANGLE_EXHAUSTIVE_MAX_N:
            for y in range(n):
                through = dist[:, y][:, None] + dist[y, :][None, :]
                excess = dist - through - settings.METRIC_ABS_TOL - settings.METRIC_REL_TOL * dist
                k = int(np.argmax(excess))
                if excess.flat[k] > worst:
                    x, z = np.unravel_index(k, excess.shape)
                    worst = float(excess.flat[k])
                    witness = (int(x), y, int(z))
        else:
            rng = np.random.default_rng(settings.DEFAULT_SEED if seed is None else seed)
            x, y, z = rng.integers(0, n, size=(3, settings.TRIANGLE_SAMPLE_SIZE))
            excess = dist[x, z] - dist[x, y] - dist[y, z] - settings.METRIC_ABS_TOL - settings.METRIC_REL_TOL * dist[x, z]
            k = int(np.argmax(excess))
            if excess[k] > 0:
                worst = float(excess[k])
                witness = (int(x[k]), int(y[k]), int(z[k]))
            logger.debug("Sampled %d triangle triples on %d points", settings.TRIANGLE_SAMPLE_SIZE, n)

        if witness is not None:
            x, y, z = witness
            raise TriangleViolation(
                f"d({x},{z}) exceeds d({x},{y}) + d({y},{z}) by {worst:.3e}",
                {"triple": list(witness), "excess": worst}
            )

    @staticmethod
    def validate_masses(mass: np.ndarray):
        """Validate nonnegative masses with positive total"""
        if (mass < 0).any():
            i = int(np.argmin(mass))
            raise NegativeMass(f"Point {i} has negative mass {mass[i]}", {"point": i})
        if mass.sum() <= 0:
            raise ZeroTotalMass("Total mass must be positive")

    @staticmethod
    def validate_space(
        dist: np.ndarray,
        mass: np.ndarray,
        settings: Optional[Settings] = None,
        check_triangle: bool = True,
    ):
        """Run every metric check in order"""
        settings = settings or default_settings
        SpaceValidator.validate_finite(dist, mass)
        SpaceValidator.validate_masses(mass)
        SpaceValidator.validate_symmetry(dist, settings)
        SpaceValidator.validate_separation(dist, settings)
        if check_triangle:
            SpaceValidator.validate_triangle(dist, settings)
