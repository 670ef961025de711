"""
Channel, information-set and simulation-result models.
"""

import math
from enum import Enum
from typing import Any, List, Optional

from pydantic import BaseModel, Field, model_validator


class ChannelModel(str, Enum):
    """Supported binary memoryless symmetric channels."""

    BEC = "bec"
    BSC = "bsc"
    AWGN = "awgn"


class BmsChannel(BaseModel):
    """A BMSC given by its model and single parameter (ε, p or σ)."""

    model: ChannelModel = Field(..., description="Channel family")
    parameter: float = Field(..., description="Erasure rate, crossover probability or noise std")

    @model_validator(mode="after")
    def check_parameter(self) -> "BmsChannel":
        """Validate the parameter range for the model."""
        p = self.parameter
        if self.model is ChannelModel.BEC and not 0.0 <= p <= 1.0:
            raise ValueError("BEC erasure probability must lie in [0, 1]")
        if self.model is ChannelModel.BSC and not 0.0 <= p <= 0.5:
            raise ValueError("BSC crossover probability must lie in [0, 1/2]")
        if self.model is ChannelModel.AWGN and not p > 0.0:
            raise ValueError("AWGN noise standard deviation must be positive")
        return self

    @classmethod
    def parse(cls, spec: str) -> "BmsChannel":
        """
        Parse a channel spec such as ``bec:0.5``, ``bsc:0.1`` or ``awgn:0.794``.

        Raises:
            ValueError: If the spec is malformed or the parameter out of range
        """
        model, sep, value = spec.strip().lower().partition(":")
        if not sep:
            raise ValueError(f"channel spec '{spec}' must look like model:parameter")
        return cls(model=ChannelModel(model), parameter=float(value))

    @classmethod
    def awgn_from_ebn0(cls, snr_db: float, rate: float) -> "BmsChannel":
        """BiAWGN with unit-energy BPSK at Eb/N0 = ``snr_db`` and code rate ``rate``."""
        ebn0 = 10.0 ** (snr_db / 10.0)
        return cls(model=ChannelModel.AWGN, parameter=math.sqrt(1.0 / (2.0 * rate * ebn0)))

    def bhattacharyya(self) -> float:
        """Z(W)."""
        p = self.parameter
        if self.model is ChannelModel.BEC:
            return p
        if self.model is ChannelModel.BSC:
            return 2.0 * math.sqrt(p * (1.0 - p))
        return math.exp(-1.0 / (2.0 * p * p))

    def error_probability(self) -> float:
        """P_e(W) of the optimal single-use decision (ties split evenly)."""
        p = self.parameter
        if self.model is ChannelModel.BEC:
            return p / 2.0
        if self.model is ChannelModel.BSC:
            return p
        return 0.5 * math.erfc(1.0 / (p * math.sqrt(2.0)))

    def __str__(self) -> str:
        return f"{self.model.value}:{self.parameter:g}"

    class Config:
        """Pydantic config."""

        frozen = True


class InfoSet(BaseModel):
    """Information set of a length-2^n polar code."""

    n: int = Field(..., ge=0, description="log2 of the block length")
    K: int = Field(..., ge=0, description="Number of information bits")
    indices: List[int] = Field(..., description="Sorted information channel indices")
    method: Optional[str] = Field(None, description="How the set was constructed")

    @model_validator(mode="before")
    @classmethod
    def sort_indices(cls, data: Any) -> Any:
        if isinstance(data, dict) and "indices" in data:
            data["indices"] = sorted(int(i) for i in data["indices"])
        return data

    @model_validator(mode="after")
    def check_indices(self) -> "InfoSet":
        """Indices must be K distinct values in [0, 2^n)."""
        if len(self.indices) != self.K:
            raise ValueError(f"expected {self.K} indices, got {len(self.indices)}")
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("duplicate information indices")
        if self.indices and not (0 <= self.indices[0] and self.indices[-1] < 1 << self.n):
            raise ValueError(f"information index out of range for n={self.n}")
        return self

    @property
    def N(self) -> int:
        return 1 << self.n

    def frozen_set(self) -> List[int]:
        info = set(self.indices)
        return [i for i in range(self.N) if i not in info]

    def difference(self, other: "InfoSet") -> List[int]:
        """Indices in this set but not in ``other``."""
        return sorted(set(self.indices) - set(other.indices))


class SimResult(BaseModel):
    """One Monte Carlo operating point."""

    snr_db: Optional[float] = Field(None, description="Eb/N0 in dB (None for fixed channels)")
    channel: str = Field(..., description="Channel spec actually simulated")
    frames: int = Field(..., ge=1, description="Frames simulated")
    frame_errors: int = Field(..., ge=0, description="Frames with at least one wrong info bit")
    bit_errors: int = Field(..., ge=0, description="Wrong information bits")
    info_bits: int = Field(..., ge=0, description="Information bits per frame")
    seed: int = Field(..., description="Root seed of the run")

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames

    @property
    def ber(self) -> float:
        total = self.frames * self.info_bits
        return self.bit_errors / total if total else 0.0

    @property
    def fer_ci95(self) -> float:
        """Half-width of the normal-approximation 95% interval for the FER."""
        fer = self.fer
        return 1.96 * math.sqrt(fer * (1.0 - fer) / self.frames)

    def csv_row(self) -> List[Any]:
        snr = "" if self.snr_db is None else f"{self.snr_db:g}"
        return [snr, self.frames, self.frame_errors, f"{self.fer:.6e}",
                f"{self.fer_ci95:.6e}", f"{self.ber:.6e}", self.seed]


class GenieEstimate(BaseModel):
    """Monte Carlo estimate of Z(W^α) and T(W^α) = 2 P_e(W^α)."""

    path: str = Field(..., description="Polarization path")
    channel: str = Field(..., description="Underlying channel spec")
    trials: int = Field(..., description="Number of channel realizations")
    z: float = Field(..., description="Estimate of Z(W^α)")
    z_stderr: float = Field(..., description="Standard error of the Z estimate")
    t: float = Field(..., description="Estimate of 2 P_e(W^α)")
    t_stderr: float = Field(..., description="Standard error of the T estimate")
