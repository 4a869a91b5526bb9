from enum import Enum
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from chainlab.schemas.field import frozen_array


# ============= DOMAIN TYPES =============

class PointCloudSpace(BaseModel):
    """
    Finite metric measure space.

    Metric checks live in SpaceValidator; this model only guards shapes.
    """

    dist: np.ndarray
    mass: np.ndarray
    labels: Optional[Tuple[str, ...]] = None
    coords: Optional[np.ndarray] = None

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("dist", "mass", mode="before")
    @classmethod
    def freeze_arrays(cls, v) -> np.ndarray:
        return frozen_array(v)

    @field_validator("coords", mode="before")
    @classmethod
    def freeze_coords(cls, v):
        if v is None:
            return None
        coords = frozen_array(v)
        if coords.ndim == 1:
            coords = frozen_array(coords.reshape(-1, 1))
        return coords

    @model_validator(mode="after")
    def validate_shapes(self) -> "PointCloudSpace":
        n = self.mass.shape[0]
        if self.mass.ndim != 1 or n == 0:
            raise ValueError("Mass must be a nonempty vector")
        if self.dist.shape != (n, n):
            raise ValueError(f"Distance matrix must be {n}x{n}, got {self.dist.shape}")
        if self.labels is not None and len(self.labels) != n:
            raise ValueError("One label per point is required")
        if self.labels is not None and len(set(self.labels)) != n:
            raise ValueError("Point labels must be unique")
        if self.coords is not None and self.coords.shape[0] != n:
            raise ValueError("One coordinate row per point is required")
        return self

    @property
    def n(self) -> int:
        return int(self.mass.shape[0])

    @property
    def total_mass(self) -> float:
        return float(self.mass.sum())

    @property
    def diameter(self) -> float:
        return float(self.dist.max())

    def label_of(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)

    def index_of(self, point: Union[int, str]) -> int:
        """Resolve a label or an integer index."""
        if self.labels is not None and isinstance(point, str) and point in self.labels:
            return self.labels.index(point)
        index = int(point)
        if not 0 <= index < self.n:
            raise ValueError(f"Point {point} is not in the space")
        return index


class EpsilonGraph(BaseModel):
    """Edges (i, j) with 0 < d(i, j) <= eps, stored as per-point neighbor lists."""

    eps: float
    neighbors: Tuple[np.ndarray, ...]
    lengths: Tuple[np.ndarray, ...]

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def n(self) -> int:
        return len(self.neighbors)

    @property
    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self.neighbors) // 2

    def edges(self) -> List[Tuple[int, int]]:
        """Unordered edges (i < j) in lexicographic order."""
        return [
            (i, int(j))
            for i, nbrs in enumerate(self.neighbors)
            for j in nbrs
            if i < j
        ]

    def degree(self, i: int) -> int:
        return int(len(self.neighbors[i]))


class ComponentPartition(BaseModel):
    """Chain-connected components at scale eps, numbered by smallest member."""

    eps: float
    component_of: np.ndarray
    components: Tuple[frozenset, ...]
    min_gap: float = Field(description="Smallest distance between points of distinct components")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def count(self) -> int:
        return len(self.components)

    def same_component(self, i: int, j: int) -> bool:
        return bool(self.component_of[i] == self.component_of[j])


class DoublingEstimate(BaseModel):
    constant: float
    witness_center: Optional[int] = None
    witness_radius: Optional[float] = None
    skipped: List[Tuple[int, float]] = Field(default_factory=list, description="(center, radius) with empty ball")


# ============= GENERATOR DESCRIPTORS =============

class MassRule(str, Enum):
    UNIFORM = "uniform"
    UNIT = "unit"
    COUNTING_NORMALIZED = "counting_normalized"


class GridDescriptor(BaseModel):
    kind: Literal["grid"] = "grid"
    dim: int = Field(default=1, ge=1, le=3)
    side: int = Field(..., ge=1, description="Points per axis")
    spacing: float = Field(..., gt=0.0)
    mass_rule: MassRule = MassRule.UNIFORM

    model_config = {
        "json_schema_extra": {
            "examples": [{"kind": "grid", "dim": 1, "side": 11, "spacing": 0.1, "mass_rule": "uniform"}]
        }
    }


class TwoSequenceDescriptor(BaseModel):
    kind: Literal["two_sequence"] = "two_sequence"
    n_min: int = Field(default=3, ge=1)
    n_max: int = Field(..., ge=1)

    @model_validator(mode="after")
    def validate_range(self) -> "TwoSequenceDescriptor":
        if self.n_max < self.n_min:
            raise ValueError("n_max must be at least n_min")
        return self


class PuncturedGridDescriptor(BaseModel):
    kind: Literal["punctured_grid"] = "punctured_grid"
    grid: GridDescriptor
    punctures: List[int] = Field(..., min_length=1, description="Point ids whose mass is set to zero")


GeneratorDescriptor = Union[GridDescriptor, TwoSequenceDescriptor, PuncturedGridDescriptor]


# ============= POINT-CLOUD DOCUMENT =============

class PointDocument(BaseModel):
    id: str
    mass: float
    coords: Optional[List[float]] = None

    @field_validator("id", mode="before")
    @classmethod
    def coerce_id(cls, v) -> str:
        return str(v)


class MatrixMetric(BaseModel):
    matrix: List[List[float]]


class SpaceDocument(BaseModel):
    """On-disk point-cloud schema."""

    points: List[PointDocument] = Field(..., min_length=1)
    metric: Union[Literal["euclidean"], MatrixMetric] = "euclidean"

    model_config = {
        "extra": "forbid",
        "json_schema_extra": {
            "examples": [
                {
                    "points": [
                        {"id": "a", "mass": 1.0, "coords": [0.0]},
                        {"id": "b", "mass": 1.0, "coords": [1.0]},
                    ],
                    "metric": "euclidean",
                }
            ]
        },
    }

    @model_validator(mode="after")
    def validate_metric_source(self) -> "SpaceDocument":
        n = len(self.points)
        if self.metric == "euclidean":
            if any(p.coords is None for p in self.points):
                raise ValueError("Euclidean metric requires coords on every point")
            if len({len(p.coords) for p in self.points}) != 1:
                raise ValueError("All points must have the same number of coordinates")
        else:
            if len(self.metric.matrix) != n or any(len(row) != n for row in self.metric.matrix):
                raise ValueError(f"Distance matrix must be {n}x{n}")
        return self
