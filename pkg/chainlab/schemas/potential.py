from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from chainlab.schemas.field import ScalarField


class PotentialSpec(BaseModel):
    """Seed values on A, a gradient g and a scale; cap is the optional bound M."""

    seeds: Tuple[int, ...]
    seed_values: Tuple[float, ...]
    g: ScalarField
    eps: float = Field(..., gt=0.0)
    lam: float = Field(default=0.5, ge=0.0, le=1.0)
    cap: Optional[float] = None

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @model_validator(mode="after")
    def validate_seeds(self) -> "PotentialSpec":
        if len(self.seeds) != len(self.seed_values):
            raise ValueError("One value per seed is required")
        return self


class EBRow(BaseModel):
    n: int
    eps: float
    u_error: float
    g_error: float
    g_energy: float
    verified: bool


class EBPipelineReport(BaseModel):
    p: float
    seeds: str
    rows: List[EBRow]
