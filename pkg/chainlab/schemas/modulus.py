from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator


class FamilyKind(str, Enum):
    CONNECT = "connect"
    HIT = "hit"
    EXPLICIT = "explicit"


class EndpointPolicy(str, Enum):
    """Where a hit family may meet its set: anywhere, before the last point, after the first."""

    ANY = "any"
    NOT_LAST = "not_last"
    NOT_FIRST = "not_first"


class ChainFamily(BaseModel):
    """
    Implicitly described set of eps-chains.

    connect: chains from x to y.
    hit: chains meeting hit_set (subject to endpoint_policy).
    explicit: an enumerated list of chains given by point ids.
    """

    kind: FamilyKind
    x: Optional[int] = None
    y: Optional[int] = None
    hit_set: Tuple[int, ...] = ()
    chains: Tuple[Tuple[int, ...], ...] = ()
    endpoint_policy: EndpointPolicy = EndpointPolicy.ANY

    model_config = {
        "frozen": True,
        "json_schema_extra": {
            "examples": [
                {"kind": "connect", "x": 0, "y": 10},
                {"kind": "hit", "hit_set": [3], "endpoint_policy": "any"},
            ]
        },
    }

    @model_validator(mode="after")
    def validate_kind(self) -> "ChainFamily":
        if self.kind == FamilyKind.CONNECT:
            if self.x is None or self.y is None:
                raise ValueError("A connect family needs both endpoints")
            if self.x == self.y:
                raise ValueError("A connect family needs distinct endpoints")
        elif self.kind == FamilyKind.HIT:
            if not self.hit_set:
                raise ValueError("A hit family needs a nonempty set")
        elif any(len(c) < 2 for c in self.chains):
            raise ValueError("Every explicit chain needs at least two points")
        return self

    @classmethod
    def connect(cls, x: int, y: int) -> "ChainFamily":
        return cls(kind=FamilyKind.CONNECT, x=x, y=y)

    @classmethod
    def hit(cls, hit_set, endpoint_policy: EndpointPolicy = EndpointPolicy.ANY) -> "ChainFamily":
        return cls(
            kind=FamilyKind.HIT,
            hit_set=tuple(sorted(set(int(e) for e in hit_set))),
            endpoint_policy=endpoint_policy,
        )

    @classmethod
    def explicit(cls, chains) -> "ChainFamily":
        return cls(kind=FamilyKind.EXPLICIT, chains=tuple(tuple(int(q) for q in c) for c in chains))


class FunctionClassTag(str, Enum):
    ALL_BOREL = "all_borel"
    FINITE_AT = "finite_at"
    LIPSCHITZ = "lipschitz"


class FunctionClass(BaseModel):
    """
    Admissible densities for a modulus program.

    finite_at(x, y) caps the density at both poles by pole_cap. On a finite
    space any finite value is reachable, so the cap stands in for finiteness;
    the default 0 matches the vanishing pole contribution as eps -> 0.
    lipschitz bounds |rho(a) - rho(b)| <= bound * d(a, b); no bound means no
    restriction.
    """

    tag: FunctionClassTag = FunctionClassTag.ALL_BOREL
    x: Optional[int] = None
    y: Optional[int] = None
    pole_cap: float = Field(default=0.0, ge=0.0)
    bound: Optional[float] = Field(default=None, gt=0.0)

    @model_validator(mode="after")
    def validate_poles(self) -> "FunctionClass":
        if self.tag == FunctionClassTag.FINITE_AT and (self.x is None or self.y is None):
            raise ValueError("finite_at needs both poles")
        return self

    @classmethod
    def all_borel(cls) -> "FunctionClass":
        return cls()

    @classmethod
    def finite_at(cls, x: int, y: int, pole_cap: float = 0.0) -> "FunctionClass":
        return cls(tag=FunctionClassTag.FINITE_AT, x=x, y=y, pole_cap=pole_cap)

    @classmethod
    def lipschitz(cls, bound: Optional[float] = None) -> "FunctionClass":
        return cls(tag=FunctionClassTag.LIPSCHITZ, bound=bound)


class ExceptionalVerdict(BaseModel):
    exceptional: bool
    modulus: float
    certificate: Optional[Dict[str, Any]] = None
    notes: List[str] = Field(default_factory=list)
