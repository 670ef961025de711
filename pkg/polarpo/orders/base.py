"""
Base class for the order services.
"""

from typing import TYPE_CHECKING, Optional, Tuple

from polarpo.exceptions import LengthMismatchError
from polarpo.paths import PathLike, as_path

if TYPE_CHECKING:
    from polarpo.models.config import EngineSettings


class BaseOrder:
    """Shared plumbing for the degradation, BEC and BMSC order services."""

    def __init__(self, settings: Optional["EngineSettings"] = None) -> None:
        """
        Initialize an order service.

        Args:
            settings: Engine settings; defaults are used when omitted
        """
        if settings is None:
            from polarpo.models.config import EngineSettings

            settings = EngineSettings()
        self._settings = settings

    @property
    def settings(self) -> "EngineSettings":
        return self._settings

    @staticmethod
    def _pair(alpha: PathLike, gamma: PathLike) -> Tuple[str, str]:
        """
        Normalize two paths to 0/1 strings of equal length.

        Raises:
            LengthMismatchError: If the lengths differ
        """
        a, g = str(as_path(alpha)), str(as_path(gamma))
        if len(a) != len(g):
            raise LengthMismatchError(len(a), len(g), errors=[f"{a!r} vs {g!r}"])
        return a, g
