"""
Wall-clock and pair-count budgets for long-running builds.
"""

import time
from typing import Optional

from polarpo.exceptions import BudgetExceededError


class Budget:
    """
    Watchdog for a unit of work limited by time and/or processed pairs.

    Example:
        >>> budget = Budget(seconds=60.0, pairs=10_000)
        >>> for chunk in chunks:
        ...     process(chunk)
        ...     budget.check(done)
    """

    def __init__(self, seconds: Optional[float] = None, pairs: Optional[int] = None) -> None:
        """
        Initialize a budget.

        Args:
            seconds: Wall-clock limit, None for unlimited
            pairs: Pair-count limit, None for unlimited
        """
        self.seconds = seconds
        self.pairs = pairs
        self._start = time.monotonic()

    @property
    def elapsed(self) -> float:
        return time.monotonic() - self._start

    @property
    def unlimited(self) -> bool:
        return self.seconds is None and self.pairs is None

    def exhausted(self, pairs_done: int = 0) -> bool:
        """Whether either limit has been reached."""
        if self.seconds is not None and self.elapsed > self.seconds:
            return True
        return self.pairs is not None and pairs_done >= self.pairs

    def check(self, pairs_done: int = 0, what: str = "build") -> None:
        """
        Raise once a limit is reached.

        Args:
            pairs_done: Pairs processed so far
            what: Name of the interrupted work, for the message

        Raises:
            BudgetExceededError: If the time or pair budget is spent
        """
        if not self.exhausted(pairs_done):
            return
        elapsed = self.elapsed
        if self.seconds is not None and elapsed > self.seconds:
            message = f"{what} did not complete within {self.seconds} seconds"
        else:
            message = f"{what} stopped after {pairs_done} pairs (budget {self.pairs})"
        raise BudgetExceededError(message, elapsed=elapsed, pairs_done=pairs_done)
