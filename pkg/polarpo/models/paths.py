"""
Path and channel-index models.
"""

from enum import Enum
from typing import Any, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator


class BitOrder(str, Enum):
    """How the n-bit expansion of a channel index maps onto path positions."""

    MSB = "msb"
    LSB = "lsb"


class Path(BaseModel):
    """
    A polarization path.

    Position 1 (``bits[0]``) is the first transform applied; 0 is the
    degrading transform and 1 the upgrading one.
    """

    bits: Tuple[int, ...] = Field(default=(), description="Transform sequence, first applied first")

    @field_validator("bits", mode="before")
    @classmethod
    def coerce_bits(cls, v: Any) -> Tuple[int, ...]:
        """Accept strings and any iterable of 0/1 values."""
        if isinstance(v, str):
            v = [int(c) for c in v]
        bits = tuple(int(b) for b in v)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("path bits must be 0 or 1")
        return bits

    def __init__(self, bits: Any = (), **kwargs: Any) -> None:
        super().__init__(bits=bits, **kwargs)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    def __repr__(self) -> str:
        return f"Path('{self}')"

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, item: Any) -> Any:
        if isinstance(item, slice):
            return Path(self.bits[item])
        return self.bits[item]

    def __add__(self, other: "Path") -> "Path":
        return Path(self.bits + tuple(other.bits))

    def __lt__(self, other: "Path") -> bool:
        return (len(self), self.code) < (len(other), other.code)

    @property
    def n0(self) -> int:
        """Number of 0 transforms."""
        return len(self.bits) - sum(self.bits)

    @property
    def n1(self) -> int:
        """Number of 1 transforms."""
        return sum(self.bits)

    @property
    def code(self) -> int:
        """Integer with bit 1 of the path as most significant bit."""
        value = 0
        for b in self.bits:
            value = (value << 1) | b
        return value

    @classmethod
    def from_code(cls, code: int, n: int) -> "Path":
        """Inverse of :attr:`code` for a path of length ``n``."""
        return cls(tuple((code >> (n - 1 - j)) & 1 for j in range(n)))

    class Config:
        """Pydantic config."""

        frozen = True


class ChannelIndex(BaseModel):
    """Index i of the synthesized channel W_N^(i), N = 2^n."""

    n: int = Field(..., ge=1, description="log2 of the block length")
    i: int = Field(..., ge=0, description="Channel index in [0, 2^n)")

    @model_validator(mode="after")
    def check_range(self) -> "ChannelIndex":
        """Reject indices outside [0, 2^n)."""
        if self.i >= 1 << self.n:
            raise ValueError(f"index {self.i} out of range for n={self.n}")
        return self

    class Config:
        """Pydantic config."""

        frozen = True
