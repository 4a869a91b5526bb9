from typing import List, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from chainlab.schemas.field import frozen_array


class Chain(BaseModel):
    """
    Ordered point ids q_0..q_N with every step no longer than eps.

    Step lengths are cached from the host space when the chain is built, so
    integrals and lengths never need the distance matrix again.
    """

    points: Tuple[int, ...] = Field(..., min_length=2)
    eps: float = Field(..., gt=0.0)
    steps: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("steps", mode="before")
    @classmethod
    def freeze_steps(cls, v) -> np.ndarray:
        return frozen_array(v)

    @model_validator(mode="after")
    def validate_steps(self) -> "Chain":
        if self.steps.shape != (len(self.points) - 1,):
            raise ValueError("One step length per consecutive pair is required")
        if (self.steps < 0).any():
            raise ValueError("Step lengths must be nonnegative")
        return self

    @property
    def start(self) -> int:
        return self.points[0]

    @property
    def end(self) -> int:
        return self.points[-1]

    @property
    def step_count(self) -> int:
        return len(self.points) - 1


class StepCurve(BaseModel):
    """Piecewise-constant map [0, 1] -> X; value i holds on [t_i, t_{i+1})."""

    breakpoints: Tuple[float, ...]
    values: Tuple[int, ...]
    terminal: int

    @model_validator(mode="after")
    def validate_breakpoints(self) -> "StepCurve":
        if len(self.breakpoints) != len(self.values) or not self.breakpoints:
            raise ValueError("One value per breakpoint is required")
        if self.breakpoints[0] != 0.0:
            raise ValueError("The first breakpoint must be 0")
        if any(b <= a for a, b in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("Breakpoints must be strictly increasing")
        if self.breakpoints[-1] >= 1.0:
            raise ValueError("Breakpoints must lie in [0, 1)")
        return self

    def at(self, t: float) -> int:
        if t >= 1.0:
            return self.terminal
        index = int(np.searchsorted(self.breakpoints, t, side="right")) - 1
        return self.values[max(index, 0)]


class SampledChain(BaseModel):
    chain: Chain
    parameters: List[float] = Field(description="Arc-length parameters before snapping")
    snap_error: float = Field(description="Largest gap between a parameter and its snapped sample")


class ChainDocument(BaseModel):
    points: List[Union[int, str]] = Field(..., min_length=2)
    eps: float = Field(..., gt=0.0)

    model_config = {
        "extra": "forbid",
        "json_schema_extra": {"examples": [{"points": [0, 1, 2], "eps": 0.1}]},
    }
