"""
Engine configuration.
"""

import os
from pathlib import Path as FsPath
from typing import Any, Callable, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

from polarpo.models.paths import BitOrder


def _env(name: str, parse: Callable[[str], Any]) -> Any:
    """Read and parse an environment variable; unparseable values are ignored."""
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return None
    try:
        return parse(raw.strip())
    except ValueError:
        return None


class EngineSettings(BaseModel):
    """Settings shared by every service of the engine."""

    bit_order: BitOrder = Field(BitOrder.MSB, description="Channel index convention")
    workers: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    db_dir: FsPath = Field(FsPath("."), description="Default directory for database files")
    tau_budget: int = Field(3, ge=0, description="Longest τ instantiated by insertion rules")
    max_length: int = Field(12, ge=1, description="Longest path length saturate accepts")
    budget_seconds: Optional[float] = Field(None, gt=0, description="Wall-clock budget")
    budget_pairs: Optional[int] = Field(None, gt=0, description="Pair-count budget")
    corollary_mode: str = Field("lemma", pattern="^(lemma|real)$")

    @classmethod
    def from_env(cls, load_env: bool = True, **overrides: Any) -> "EngineSettings":
        """
        Build settings from explicit values, then POLARPO_* variables, then defaults.

        Args:
            load_env: Whether to load a .env file first
            **overrides: Explicit values; None means "not given"

        Example:
            >>> settings = EngineSettings.from_env(workers=4)
        """
        if load_env:
            load_dotenv()

        from_env = {
            "bit_order": _env("POLARPO_BIT_ORDER", lambda s: BitOrder(s.lower())),
            "workers": _env("POLARPO_WORKERS", int),
            "db_dir": _env("POLARPO_DB_DIR", FsPath),
            "tau_budget": _env("POLARPO_TAU_BUDGET", int),
            "max_length": _env("POLARPO_MAX_LENGTH", int),
            "budget_seconds": _env("POLARPO_BUDGET_SECONDS", float),
            "budget_pairs": _env("POLARPO_BUDGET_PAIRS", int),
        }
        values = {k: v for k, v in from_env.items() if v is not None}
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)
