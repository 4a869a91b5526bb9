from typing import Any, Dict, Optional

from pydantic import BaseModel, Field


class RunConfig(BaseModel):
    """One CLI invocation in file form."""

    command: str = Field(..., min_length=1)
    action: Optional[str] = None
    parameters: Dict[str, Any] = Field(default_factory=dict)
    inputs: Dict[str, str] = Field(default_factory=dict, description="Role -> file path or fixture reference")
    out: Optional[str] = None
    csv_out: Optional[str] = None
    seed: Optional[int] = None
    tol_feas: Optional[float] = Field(default=None, gt=0.0)
    tol_kkt: Optional[float] = Field(default=None, gt=0.0)
    time_budget_ms: Optional[int] = Field(default=None, gt=0)

    model_config = {
        "extra": "forbid",
        "json_schema_extra": {
            "examples": [
                {
                    "command": "gradient",
                    "action": "min",
                    "parameters": {"eps": 0.3333333333333333, "p": 1, "lambda": 0.5},
                    "inputs": {"space": "fixture:two_sequence_3_50", "u": "fixture:two_sequence_3_50"},
                }
            ]
        },
    }


class ResultEnvelope(BaseModel):
    """Result file; everything except meta is deterministic."""

    schema_version: int = Field(alias="schema")
    command: str
    action: Optional[str] = None
    parameters: Dict[str, Any]
    input_digests: Dict[str, str]
    outputs: Dict[str, Any]
    meta: Dict[str, Any] = Field(default_factory=dict)

    model_config = {"populate_by_name": True}


class FixtureInfo(BaseModel):
    """Manifest entry for a bundled example space."""

    name: str
    descriptor: Dict[str, Any]
    snowflake_alpha: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    eps: float = Field(..., gt=0.0, description="Natural scale for the fixture")
    u: Optional[str] = Field(default=None, description="Expression or rule for the default function")
    expected: Dict[str, Any] = Field(default_factory=dict)

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "name": "two_sequence_3_50",
                    "descriptor": {"kind": "two_sequence", "n_min": 3, "n_max": 50},
                    "eps": 0.3333333333333333,
                    "u": "indicator:x",
                    "expected": {"objective_formula": "2*sum(n=3..50) n^-2"},
                }
            ]
        },
    }
