from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE_DETECTED = "infeasible_detected"
    TOLERANCE_REACHED = "tolerance_reached"


class GradientProgram(BaseModel):
    """
    Linear constraints coef_i * g_i + coef_j * g_j >= rhs over pairs within eps.

    Rows with rhs <= 0 are dropped since g >= 0 satisfies them.
    """

    n: int
    rows: np.ndarray = Field(description="Pairs (i, j) per constraint")
    coefficients: np.ndarray = Field(description="(lambda, 1 - lambda) scaled per row")
    rhs: np.ndarray
    eps: float
    lam: float
    symmetric: bool = False
    weak: bool = False

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def constraint_count(self) -> int:
        return int(self.rhs.shape[0])


class Violation(BaseModel):
    source: int
    target: int
    increment: float = Field(description="u(target) - u(source), or its absolute value")
    bound: float = Field(description="Chain integral of g over the step")
    deficit: float


class VerifyResult(BaseModel):
    accepted: bool
    violations: List[Violation] = Field(default_factory=list)
    checked_pairs: int = 0

    @property
    def max_deficit(self) -> float:
        return max((v.deficit for v in self.violations), default=0.0)


class SolveReport(BaseModel):
    """Outcome of a gradient or modulus program."""

    objective: float
    argument: np.ndarray
    max_violation: float = 0.0
    iterations: int = 1
    cuts: int = 0
    status: SolveStatus = SolveStatus.OPTIMAL
    constraint_count: int = 0
    dual_bound: Optional[float] = None
    kkt_residual: Optional[float] = None
    upper_bound: Optional[float] = None
    runtime_ms: float = 0.0
    empty_family: bool = False
    binding_chains: List[Tuple[int, ...]] = Field(default_factory=list)
    certificate: Optional[Dict[str, Any]] = None
    notes: List[str] = Field(default_factory=list)

    model_config = ConfigDict(arbitrary_types_allowed=True)


class LadderRung(BaseModel):
    eps: float
    objective: float
    status: SolveStatus
    scaled: Optional[float] = Field(default=None, description="objective * d(x, y)^(p - 1)")
    empty_family: bool = False


class CurveConsistency(BaseModel):
    consistent: bool
    checked_paths: int
    exhaustive: bool
    counterexample: Optional[Tuple[int, ...]] = None
    deficit: float = 0.0
