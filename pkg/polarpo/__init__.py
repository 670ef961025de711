"""
polarpo

Exact partial orders between polar-code synthesized channels, with the
order database, β-expansion windows and an SC Monte Carlo harness.
"""

from polarpo.engine import PartialOrderEngine
from polarpo.exceptions import (
    BudgetExceededError,
    FetchError,
    IncompleteDatabaseError,
    InconsistentOrderError,
    LengthMismatchError,
    PathSyntaxError,
    PolarPOError,
    UsageError,
)
from polarpo.models import (
    BitOrder,
    BmsChannel,
    Comparison,
    Direction,
    EngineSettings,
    InfoSet,
    Kind,
    Path,
    Relation,
    Rule,
    SimResult,
)
from polarpo.paths import parse_path
from polarpo.podb import PoDb

__version__ = "0.1.0"
__all__ = [
    # Engine
    "PartialOrderEngine",
    "PoDb",
    "parse_path",
    # Exceptions
    "PolarPOError",
    "UsageError",
    "PathSyntaxError",
    "LengthMismatchError",
    "BudgetExceededError",
    "IncompleteDatabaseError",
    "InconsistentOrderError",
    "FetchError",
    # Models
    "BitOrder",
    "BmsChannel",
    "Comparison",
    "Direction",
    "EngineSettings",
    "InfoSet",
    "Kind",
    "Path",
    "Relation",
    "Rule",
    "SimResult",
]
