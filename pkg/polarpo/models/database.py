"""
Serialized forms of the relation database, its statistics and β windows.
"""

from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_serializer


class PairRecord(BaseModel):
    """One stored pair (worse, better) with its kinds and provenance."""

    worse: int = Field(..., description="Worse path code (MSB-first)")
    better: int = Field(..., description="Better path code (MSB-first)")
    kinds: List[str] = Field(..., description="Stored kinds (DEG, Z, P, BEC)")
    rules: Dict[str, str] = Field(default_factory=dict, description="Kind -> rule id")


class DbHeader(BaseModel):
    """Database metadata."""

    format: str = Field("polarpo-db", description="Document type tag")
    version: int = Field(1, description="Format version")
    n: int = Field(..., ge=0, description="Path length")
    complete: bool = Field(True, description="False when a budget cut the build short")
    bit_order: str = Field("msb", description="Index convention used when reporting indices")
    total_pairs: int = Field(..., description="C(2^n, 2)")
    config: Dict[str, Any] = Field(default_factory=dict, description="Build configuration")


class DbDocument(BaseModel):
    """JSON export of a relation database."""

    header: DbHeader
    pairs: List[PairRecord] = Field(default_factory=list)


class DbStats(BaseModel):
    """Counts and proportions of the known orders over all C(2^n, 2) pairs."""

    n: int
    total_pairs: int = Field(..., description="C(2^n, 2)")
    deg: int = Field(..., description="|P_k|: pairs ordered by degradation")
    criterion: int = Field(..., description="Pairs certified by the Z criterion alone")
    z_new: int = Field(..., description="|P_b \\ P_k|")
    z_total: int = Field(..., description="|P_b| = |P_k ∪ criterion pairs|")
    z_total_disjoint: int = Field(
        ..., description="|P_b| read as P_k plus new pairs counted separately"
    )
    z_closure: Optional[int] = Field(None, description="|P_b| after transitive closure, if built")
    p: int = Field(0, description="Pairs stored with the P kind")
    unknown: int = Field(..., description="Pairs with no known Z relation")
    deg_base: Optional[int] = Field(None, description="|P_k| under the base swap closure")
    deg_rule3: Optional[int] = Field(None, description="|P_k| with the third rule, if computed")
    deg_config: Optional[str] = Field(
        None, description="Degradation closure used: base, rule3, or none when neither matches the reference"
    )
    proportions: Dict[str, float] = Field(..., description="deg / z_new / unknown over total")
    complete: bool = True
    config: Dict[str, Any] = Field(default_factory=dict)


class BetaEndpoint(BaseModel):
    """
    Endpoint of a feasible β interval.

    Finite endpoints are real roots of an integer polynomial, known through an
    isolating rational interval ``[lo, hi]`` (``lo == hi`` for rational roots).
    """

    kind: str = Field(..., description="zero, root or inf")
    lo: Optional[Fraction] = None
    hi: Optional[Fraction] = None
    approx: float = Field(..., description="Floating approximation")
    poly: Tuple[int, ...] = Field((), description="Defining square-free polynomial, ascending")
    closed: bool = Field(..., description="Whether the endpoint belongs to the interval")

    @field_serializer("lo", "hi")
    def serialize_fraction(self, v: Optional[Fraction]) -> Optional[str]:
        return None if v is None else str(v)

    class Config:
        """Pydantic config."""

        arbitrary_types_allowed = True


class BetaInterval(BaseModel):
    """Connected component of a feasible β set."""

    left: BetaEndpoint
    right: BetaEndpoint

    def describe(self) -> str:
        lb = "[" if self.left.closed else "("
        rb = "]" if self.right.closed else ")"
        right = "∞" if self.right.kind == "inf" else f"{self.right.approx:.10g}"
        return f"{lb}{self.left.approx:.10g}, {right}{rb}"


class WindowReport(BaseModel):
    """Aggregate β window over every pair of one kind."""

    kind: str
    pairs: int = Field(..., description="Number of pairs intersected")
    constraints: int = Field(..., description="Distinct constraint polynomials")
    union: List[BetaInterval] = Field(default_factory=list, description="Full feasible set")
    component: Optional[BetaInterval] = Field(None, description="Component containing β = 1")
