"""
Error types raised by ChainLab services.

Every error carries a stable machine-readable code and the process exit
code the CLI maps it to.
"""

from typing import Any, Dict, Optional


class ChainLabError(Exception):
    """Base class for every domain error."""

    code: str = "chainlab_error"
    exit_code: int = 1

    def __init__(self, detail: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(detail)
        self.detail = detail
        self.context = context or {}

    def to_dict(self) -> dict:
        return {
            "error": self.code,
            "detail": self.detail,
            "context": self.context,
            "exit_code": self.exit_code,
        }


# ============= INPUT / CONFIG (exit 2) =============

class InputError(ChainLabError):
    code = "input_error"
    exit_code = 2


class ConfigParse(InputError):
    code = "config_parse"


class MissingInput(InputError):
    code = "missing_input"


class BadDescriptor(InputError):
    code = "bad_descriptor"


class InvalidParameter(InputError):
    code = "invalid_parameter"


class UsageError(InputError):
    code = "usage_error"


# ============= METRIC SPACE (exit 2) =============

class MetricError(InputError):
    code = "metric_error"


class NonSymmetricDistance(MetricError):
    code = "non_symmetric_distance"


class TriangleViolation(MetricError):
    code = "triangle_violation"


class DegenerateDistance(MetricError):
    code = "degenerate_distance"


class NegativeMass(MetricError):
    code = "negative_mass"


class ZeroTotalMass(MetricError):
    code = "zero_total_mass"


# ============= DOMAIN PRECONDITIONS (exit 3) =============

class DomainError(ChainLabError):
    code = "domain_error"
    exit_code = 3


class NonPositiveEps(DomainError):
    code = "non_positive_eps"


class AlphaOutOfRange(DomainError):
    code = "alpha_out_of_range"


class EmptyRadiusGrid(DomainError):
    code = "empty_radius_grid"


class LambdaOutOfRange(DomainError):
    code = "lambda_out_of_range"


class EndpointMismatch(DomainError):
    code = "endpoint_mismatch"


class ZeroLengthChain(DomainError):
    code = "zero_length_chain"


class DegenerateCurve(DomainError):
    code = "degenerate_curve"


class ZeroBallMass(DomainError):
    code = "zero_ball_mass"


class EmptyBall(DomainError):
    code = "empty_ball"


class NoChainWithinBudget(DomainError):
    code = "no_chain_within_budget"


class NotSeparating(DomainError):
    code = "not_separating"


class EmptySeedSet(DomainError):
    code = "empty_seed_set"


# ============= SOLVERS (exit 4) =============

class SolverError(ChainLabError):
    code = "solver_error"
    exit_code = 4


class SolverStall(SolverError):
    code = "solver_stall"


class NoAdmissibleDensity(SolverError):
    code = "no_admissible_density"
