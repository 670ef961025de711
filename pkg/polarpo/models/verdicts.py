"""
Verdict models returned by the order deciders and the BMSC provers.
"""

from enum import Enum
from fractions import Fraction
from typing import Any, List, Optional, Tuple

from pydantic import BaseModel, Field, field_serializer, model_validator


class Direction(str, Enum):
    """Outcome of comparing two paths (first argument against second)."""

    LEQ = "LEQ"
    GEQ = "GEQ"
    EQUAL = "EQUAL"
    INCOMPARABLE = "INCOMPARABLE"


class Certificate(str, Enum):
    """How a polynomial sign verdict was established."""

    TRIVIAL = "trivial"
    BERNSTEIN = "bernstein"
    STURM = "sturm"
    CLOSED_FORM = "closed-form"
    WITNESS = "witness"


class NonnegResult(BaseModel):
    """Sign of a polynomial on [0, 1]."""

    nonneg: bool = Field(..., description="True iff d(x) >= 0 on all of [0, 1]")
    witness: Optional[Fraction] = Field(None, description="Dyadic point with d(witness) < 0")
    certificate: Certificate = Field(..., description="Stage that settled the verdict")
    subdivisions: int = Field(0, description="Bernstein sub-intervals examined")

    @field_serializer("witness")
    def serialize_witness(self, v: Optional[Fraction]) -> Optional[str]:
        return None if v is None else str(v)

    class Config:
        """Pydantic config."""

        frozen = True
        arbitrary_types_allowed = True


class DegVerdict(BaseModel):
    """Result of the degradation-order decision."""

    comparable: bool = Field(..., description="True unless INCOMPARABLE")
    direction: Direction = Field(..., description="Relation of the first path to the second")
    trace: List[str] = Field(
        default_factory=list,
        description="Rewrite chain from the worse path to the better one",
    )

    class Config:
        """Pydantic config."""

        frozen = True


class BecVerdict(BaseModel):
    """Result of the BEC-order decision."""

    relation: Direction = Field(..., description="Relation of the first path to the second")
    certificate: Certificate = Field(..., description="Certificate of the decisive check")
    witness_leq: Optional[Fraction] = Field(
        None, description="x with Z_first(x) < Z_second(x), refuting first <= second"
    )
    witness_geq: Optional[Fraction] = Field(
        None, description="x with Z_second(x) < Z_first(x), refuting second <= first"
    )

    @field_serializer("witness_leq", "witness_geq")
    def serialize_witness(self, v: Optional[Fraction]) -> Optional[str]:
        return None if v is None else str(v)

    class Config:
        """Pydantic config."""

        frozen = True
        arbitrary_types_allowed = True


class Interval(BaseModel):
    """Closed sub-interval of [0, 1] with rational endpoints."""

    lo: Fraction = Field(..., description="Lower endpoint")
    hi: Fraction = Field(..., description="Upper endpoint")

    @model_validator(mode="before")
    @classmethod
    def coerce_endpoints(cls, data: Any) -> Any:
        """Accept ints, strings and floats (floats are taken at their exact binary value)."""
        if isinstance(data, dict):
            for key in ("lo", "hi"):
                if key in data and not isinstance(data[key], Fraction):
                    data[key] = Fraction(data[key])
        return data

    @model_validator(mode="after")
    def check_order(self) -> "Interval":
        """Reject anything outside 0 <= lo <= hi <= 1."""
        if not (0 <= self.lo <= self.hi <= 1):
            raise ValueError(f"invalid enclosure [{self.lo}, {self.hi}]")
        return self

    @classmethod
    def point(cls, x: Any) -> "Interval":
        """Degenerate interval [x, x]."""
        return cls(lo=x, hi=x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x: Any) -> bool:
        return self.lo <= Fraction(x) <= self.hi

    def intersect(self, other: "Interval") -> "Interval":
        """Intersection; both must be enclosures of the same quantity."""
        return Interval(lo=max(self.lo, other.lo), hi=min(self.hi, other.hi))

    def as_floats(self) -> Tuple[float, float]:
        return float(self.lo), float(self.hi)

    @field_serializer("lo", "hi")
    def serialize_endpoint(self, v: Fraction) -> str:
        return str(v)

    class Config:
        """Pydantic config."""

        frozen = True
        arbitrary_types_allowed = True


class ProofResult(BaseModel):
    """Outcome of a sufficient-condition prover for the Z or P order."""

    proven: bool = Field(..., description="True certifies the order; False means undecided")
    strategy: Optional[str] = Field(None, description="Prover strategy that succeeded (S1/S2/...)")
    rule: Optional[str] = Field(None, description="Named formulation matching the pair shape")
    premise: Optional[Tuple[str, str]] = Field(
        None, description="BEC premise (worse, better) the certificate is about"
    )
    certificate: Optional[Certificate] = Field(None, description="Certificate type of the residual")
    residual: Any = Field(None, description="Certified-nonnegative difference polynomial", exclude=True)
    residual_degree: Optional[int] = Field(None, description="Degree of the residual")
    alternatives: List[str] = Field(
        default_factory=list, description="Other strategies that also succeeded"
    )
    alternative_residuals: List[Any] = Field(
        default_factory=list, description="Residuals of the other strategies", exclude=True
    )

    class Config:
        """Pydantic config."""

        arbitrary_types_allowed = True


class Comparison(BaseModel):
    """Answer of a two-path comparison, as printed by ``polarpo compare``."""

    first: str = Field(..., description="First path as given")
    second: str = Field(..., description="Second path as given")
    relation: str = Field(..., description="Requested relation (deg, bec, z, p or auto)")
    kind: Optional[str] = Field(None, description="Kind the verdict is about")
    direction: Optional[Direction] = Field(None, description="Relation of first to second; None if undecided")
    verdict: str = Field(..., description="Readable verdict, e.g. ``1100 ≼_Z 1011`` or UNDECIDED")
    rule: Optional[str] = Field(None, description="Rule or named formulation that settled it")
    strategy: Optional[str] = Field(None, description="Prover strategy")
    premise: Optional[str] = Field(None, description="BEC premise the certificate is about")
    certificate: Optional[str] = Field(None, description="Certificate type of the decisive check")
    residual_degree: Optional[int] = Field(None, description="Degree of the certified residual")
    witness: Optional[str] = Field(None, description="Refuting point for a BEC non-relation")
    trace: List[str] = Field(default_factory=list, description="Degradation rewrite chain")
    proof: Optional[str] = Field(None, description="Text proof of a derived relation")
    also: List[str] = Field(default_factory=list, description="Other kinds that hold in the same direction")
