from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class RieszWeights(BaseModel):
    """Density of the pole-pair measure with respect to the space mass."""

    x: int
    y: int
    L: float
    weights: np.ndarray
    total_mass: float
    bound: Optional[float] = Field(default=None, description="8 * C_D * L * d(x, y) when C_D is known")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    def measure(self, mass: np.ndarray) -> np.ndarray:
        return self.weights * mass


class PICase(BaseModel):
    center: int
    radius: float
    lhs: float
    rhs: float
    ratio: float


class PIAudit(BaseModel):
    worst_constant: float
    witness: Optional[PICase] = None
    unbounded: bool = False
    cases: List[PICase] = Field(default_factory=list)
    skipped: List[Tuple[int, float]] = Field(default_factory=list, description="Balls with zero mass")
    p: float = 1.0
    dilation: float = 1.0


class PointwiseResult(BaseModel):
    lhs: float
    rhs: float
    satisfied: bool
    eps: float
    chain: Tuple[int, ...] = ()
    chain_length: float = 0.0
    exact: bool = True
    component_mismatch: bool = False


class ProfileEntry(BaseModel):
    radius: float
    shell_measure: float
    value: float
    empty: bool = False


class MinkowskiProfile(BaseModel):
    entries: List[ProfileEntry]
    minimum: float
    surrogate: str = "profile_min"


class ShellWidth(BaseModel):
    radius: float
    shell_size: int
    width: float
    shell_measure: float
    ratio: float
    lower_bound: float = Field(description="radius - 2 * eps")


class BMCCandidate(BaseModel):
    region: Tuple[int, ...]
    profile: MinkowskiProfile
    widths: List[ShellWidth]
    zero_entries: List[float] = Field(default_factory=list)


class BMCAudit(BaseModel):
    worst_c: float
    worst_C: float
    candidates: List[BMCCandidate]
