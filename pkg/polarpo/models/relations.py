"""
Relation kinds, rule identifiers and derivation trees.
"""

from enum import Enum, IntFlag
from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class Kind(str, Enum):
    """Order kinds between equal-length paths."""

    DEG = "DEG"
    Z = "Z"
    P = "P"
    BEC = "BEC"

    @property
    def mask(self) -> "KindMask":
        return KindMask[self.value]

    @property
    def symbol(self) -> str:
        return "≼" if self is Kind.DEG else f"≼_{self.value}"


class KindMask(IntFlag):
    """Bit set of kinds stored per database pair."""

    NONE = 0
    DEG = 1
    Z = 2
    P = 4
    BEC = 8


# Kinds implied by each kind (degradation implies every parameter order,
# and Z or P dominance over all BMSCs implies dominance on the BEC).
IMPLIES: Dict[KindMask, KindMask] = {
    KindMask.DEG: KindMask.DEG | KindMask.Z | KindMask.P | KindMask.BEC,
    KindMask.Z: KindMask.Z | KindMask.BEC,
    KindMask.P: KindMask.P | KindMask.BEC,
    KindMask.BEC: KindMask.BEC,
}


def implied(mask: int) -> KindMask:
    """Close a kind mask under the implication lattice."""
    out = KindMask(mask)
    for kind, closure in IMPLIES.items():
        if mask & kind:
            out |= closure
    return out


class Rule(str, Enum):
    """Identifiers of every derivation step."""

    DEG = "deg"
    RULE3 = "rule3"
    L1 = "L1"
    L2 = "L2"
    TRANS = "T"
    THM1 = "thm1"
    THM2 = "thm2"
    THM3 = "thm3"
    PROP9 = "prop9"
    PROP10 = "prop10"
    THM4 = "thm4"
    THM5 = "thm5"
    COR1 = "cor1"
    R1 = "R1"
    R2 = "R2"
    R6 = "R6"
    R7 = "R7"
    BEC = "bec"
    EQUAL = "equal"


class Relation(BaseModel):
    """
    A certified relation ``worse ≼_kind better`` with its derivation.

    Leaves carry exact certificates (a BFS rewrite trace for degradation,
    a polynomial certificate for BEC dominance); inner nodes name the rule
    that combines their premises.
    """

    kind: Kind = Field(..., description="Order kind")
    worse: str = Field(..., description="Worse path")
    better: str = Field(..., description="Better path")
    rule: Rule = Field(..., description="Rule that produced this relation")
    premises: List["Relation"] = Field(default_factory=list, description="Premise relations")
    certificate: Optional[str] = Field(None, description="Leaf certificate (bfs, bernstein, ...)")
    note: Optional[str] = Field(None, description="Rule instantiation details")

    def statement(self) -> str:
        """Human readable ``worse ≼_K better``."""
        return f"{self.worse or 'ε'} {self.kind.symbol} {self.better or 'ε'}"

    def leaves(self) -> List["Relation"]:
        if not self.premises:
            return [self]
        out: List[Relation] = []
        for p in self.premises:
            out.extend(p.leaves())
        return out

    def depth(self) -> int:
        return 1 + max((p.depth() for p in self.premises), default=0)

    def to_text(self, indent: int = 0) -> str:
        """Indented text proof, conclusion first."""
        pad = "  " * indent
        line = f"{pad}{self.statement()}  [{self.rule.value}"
        if self.note:
            line += f": {self.note}"
        if self.certificate:
            line += f"; {self.certificate}"
        line += "]"
        return "\n".join([line] + [p.to_text(indent + 1) for p in self.premises])

    class Config:
        """Pydantic config."""

        frozen = True


Relation.model_rebuild()
