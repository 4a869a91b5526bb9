from enum import Enum
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator


class FieldRole(str, Enum):
    FUNCTION = "function"
    GRADIENT = "gradient"
    DENSITY = "density"


def frozen_array(values, dtype=float) -> np.ndarray:
    """Copy into a read-only numpy array."""
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


class ScalarField(BaseModel):
    """Per-point extended real values; gradients and densities are nonnegative."""

    values: np.ndarray
    role: FieldRole = FieldRole.FUNCTION

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("values", mode="before")
    @classmethod
    def validate_values(cls, v) -> np.ndarray:
        array = frozen_array(v)
        if array.ndim != 1:
            raise ValueError("Field values must be a flat vector")
        if np.isnan(array).any():
            raise ValueError("Field values cannot be NaN")
        return array

    @model_validator(mode="after")
    def validate_sign(self) -> "ScalarField":
        if self.role != FieldRole.FUNCTION and (self.values < 0).any():
            raise ValueError(f"A {self.role.value} field must be nonnegative")
        return self

    @classmethod
    def function(cls, values: Sequence[float]) -> "ScalarField":
        return cls(values=values, role=FieldRole.FUNCTION)

    @classmethod
    def gradient(cls, values: Sequence[float]) -> "ScalarField":
        return cls(values=values, role=FieldRole.GRADIENT)

    @classmethod
    def density(cls, values: Sequence[float]) -> "ScalarField":
        return cls(values=values, role=FieldRole.DENSITY)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def __len__(self) -> int:
        return self.n

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())
