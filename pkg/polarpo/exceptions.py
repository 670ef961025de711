"""
Custom exceptions for the polarization partial-order engine.
"""

from typing import Any, Dict, List, Optional


class PolarPOError(Exception):
    """Base exception for all polarpo errors."""

    code: Optional[str] = None

    def __init__(
        self,
        message: str,
        details: Optional[Dict[str, Any]] = None,
        errors: Optional[List[str]] = None,
    ) -> None:
        """
        Initialize a polarpo error.

        Args:
            message: Error message
            details: Structured context (paths, lengths, budgets, ...)
            errors: Individual error messages when several problems were found
        """
        self.message = message
        self.details = details or {}
        self.errors = errors or []
        super().__init__(self.message)

    def __str__(self) -> str:
        """Return string representation of the error."""
        if self.code:
            return f"[{self.code}] {self.message}"
        return self.message

    def to_dict(self) -> Dict[str, Any]:
        """Return the single-line JSON payload used on standard error."""
        payload: Dict[str, Any] = {"error": type(self).__name__, "message": self.message}
        if self.details:
            payload["details"] = self.details
        if self.errors:
            payload["errors"] = self.errors
        return payload


class UsageError(PolarPOError):
    """Invalid input supplied by the caller."""

    code = "usage"


class PathSyntaxError(UsageError):
    """Path text is not a 0/1 string with optional run-length shorthand."""

    pass


class LengthMismatchError(UsageError):
    """Two paths that must have equal length do not."""

    def __init__(self, left: int, right: int, **kwargs: Any) -> None:
        """
        Initialize a length mismatch error.

        Args:
            left: Length of the first path
            right: Length of the second path
            **kwargs: Additional arguments passed to PolarPOError
        """
        super().__init__(
            f"paths must have equal length, got {left} and {right}",
            details={"left": left, "right": right},
            **kwargs,
        )
        self.left = left
        self.right = right


class DimensionError(UsageError):
    """Staircase parameters violate their preconditions."""

    pass


class InvalidEnclosureError(UsageError):
    """An interval is not a sub-interval of [0, 1]."""

    pass


class InfoSetError(UsageError):
    """Information set cannot be built (bad K, duplicate or missing indices)."""

    pass


class ReliabilityFileError(UsageError):
    """Reliability sequence file is malformed or too short."""

    pass


class UnknownDatabaseFormatError(UsageError):
    """Database file is neither the json nor the binary format."""

    pass


class BudgetExceededError(PolarPOError):
    """A wall-clock or pair-count budget ran out."""

    code = "budget"

    def __init__(
        self,
        message: str,
        elapsed: Optional[float] = None,
        pairs_done: Optional[int] = None,
        **kwargs: Any,
    ) -> None:
        """
        Initialize a budget error.

        Args:
            message: Error message
            elapsed: Seconds spent when the budget ran out
            pairs_done: Pairs processed when the budget ran out
            **kwargs: Additional arguments passed to PolarPOError
        """
        super().__init__(message, **kwargs)
        self.elapsed = elapsed
        self.pairs_done = pairs_done
        self.details.setdefault("elapsed", elapsed)
        self.details.setdefault("pairs_done", pairs_done)


class IncompleteDatabaseError(PolarPOError):
    """Operation needs a complete database but got a partial one."""

    pass


class InconsistentOrderError(PolarPOError):
    """A relation and its reverse were both derived for distinct paths."""

    pass


class SinkError(PolarPOError):
    """Output file could not be written."""

    pass


class FetchError(PolarPOError):
    """Downloading a reliability sequence failed."""

    def __init__(self, message: str, status_code: Optional[int] = None, **kwargs: Any) -> None:
        """
        Initialize a download error.

        Args:
            message: Error message
            status_code: HTTP status code (0 for transport errors)
            **kwargs: Additional arguments passed to PolarPOError
        """
        super().__init__(message, **kwargs)
        self.status_code = status_code

    def __str__(self) -> str:
        """Return string representation of the error."""
        if self.status_code:
            return f"[{self.status_code}] {self.message}"
        return self.message


class SequenceNotFoundError(FetchError):
    """404 Not Found - no sequence at the given URL."""

    pass


class RateLimitError(FetchError):
    """429 Too Many Requests - the host throttled the download."""

    def __init__(self, message: str, retry_after: Optional[int] = None, **kwargs: Any) -> None:
        """
        Initialize a rate limit error.

        Args:
            message: Error message
            retry_after: Seconds to wait before retrying
            **kwargs: Additional arguments passed to FetchError
        """
        super().__init__(message, **kwargs)
        self.retry_after = retry_after

    def __str__(self) -> str:
        """Return string representation with retry information."""
        base = super().__str__()
        if self.retry_after:
            return f"{base} (retry after {self.retry_after}s)"
        return base


class ServerError(FetchError):
    """500+ Server Error - the host failed to serve the file."""

    pass


# Map HTTP status codes to exception classes
ERROR_MAP: Dict[int, type[FetchError]] = {
    404: SequenceNotFoundError,
    429: RateLimitError,
    500: ServerError,
    502: ServerError,
    503: ServerError,
    504: ServerError,
}

# CLI exit codes, most specific class first
EXIT_CODES: Dict[type[PolarPOError], int] = {
    UsageError: 2,
    BudgetExceededError: 3,
}


def get_exception_for_status(
    status_code: int,
    message: str,
    retry_after: Optional[int] = None,
) -> FetchError:
    """
    Get the appropriate exception for an HTTP status code.

    Args:
        status_code: HTTP status code
        message: Error message
        retry_after: Value of the Retry-After header, if any

    Returns:
        Appropriate exception instance
    """
    if status_code == 429:
        return RateLimitError(message=message, status_code=status_code, retry_after=retry_after)
    exception_class = ERROR_MAP.get(status_code, FetchError)
    return exception_class(message=message, status_code=status_code)


def exit_code_for(exc: BaseException) -> int:
    """
    Map an exception to a CLI exit code.

    Args:
        exc: The exception that aborted the command

    Returns:
        2 for usage errors, 3 for budget aborts, 1 for anything else
    """
    for cls, code in EXIT_CODES.items():
        if isinstance(exc, cls):
            return code
    return 1
