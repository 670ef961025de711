"""
Pydantic models for paths, verdicts, relations, databases and simulations.
"""

from polarpo.models.channels import BmsChannel, ChannelModel, GenieEstimate, InfoSet, SimResult
from polarpo.models.config import EngineSettings
from polarpo.models.database import (
    BetaEndpoint,
    BetaInterval,
    DbDocument,
    DbHeader,
    DbStats,
    PairRecord,
    WindowReport,
)
from polarpo.models.paths import BitOrder, ChannelIndex, Path
from polarpo.models.relations import Kind, KindMask, Relation, Rule
from polarpo.models.verdicts import (
    BecVerdict,
    Certificate,
    Comparison,
    DegVerdict,
    Direction,
    Interval,
    NonnegResult,
    ProofResult,
)

__all__ = [
    # Paths
    "BitOrder",
    "ChannelIndex",
    "Path",
    # Verdicts
    "BecVerdict",
    "Certificate",
    "Comparison",
    "DegVerdict",
    "Direction",
    "Interval",
    "NonnegResult",
    "ProofResult",
    # Relations
    "Kind",
    "KindMask",
    "Relation",
    "Rule",
    # Database
    "BetaEndpoint",
    "BetaInterval",
    "DbDocument",
    "DbHeader",
    "DbStats",
    "PairRecord",
    "WindowReport",
    # Channels and simulation
    "BmsChannel",
    "ChannelModel",
    "GenieEstimate",
    "InfoSet",
    "SimResult",
    # Configuration
    "EngineSettings",
]
