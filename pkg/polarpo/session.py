"""
HTTP session for downloading reliability sequences.
"""

import logging
import re
from pathlib import Path as FsPath
from typing import Any, List, Optional, Union

import httpx

from polarpo.exceptions import ReliabilityFileError, SinkError, get_exception_for_status

logger = logging.getLogger(__name__)

_INTEGER = re.compile(r"-?\d+")


def parse_sequence(text: str) -> List[int]:
    """
    Channel indices from sequence text, least reliable first.

    Accepts one index per line as well as comma or whitespace separated
    tables; ``#`` starts a comment.

    Raises:
        ReliabilityFileError: If the text holds no indices

    Example:
        >>> parse_sequence("# 5G\\n0, 1, 2\\n4 3")
        [0, 1, 2, 4, 3]
    """
    sequence = []
    for line in text.splitlines():
        body = line.split("#", 1)[0]
        sequence.extend(int(tok) for tok in _INTEGER.findall(body))
    if not sequence:
        raise ReliabilityFileError("downloaded sequence holds no indices")
    return sequence


class ReliabilitySession:
    """Synchronous HTTP session fetching reliability sequences from a user-supplied URL."""

    def __init__(self, timeout: float = 30.0, transport: Optional[httpx.BaseTransport] = None) -> None:
        """
        Initialize a download session.

        Args:
            timeout: Request timeout in seconds
            transport: Custom httpx transport (tests)
        """
        self.timeout = timeout
        self.client = httpx.Client(
            timeout=timeout,
            follow_redirects=True,
            headers={"Accept": "text/plain, */*", "User-Agent": "polarpo/0.1.0"},
            transport=transport,
        )

    def fetch_text(self, url: str) -> str:
        """
        Download a text document.

        Raises:
            FetchError: If the request fails
        """
        try:
            response = self.client.get(url)
            if response.status_code >= 400:
                self._handle_error_response(response)
            return response.text
        except httpx.HTTPError as e:
            raise get_exception_for_status(
                status_code=0,
                message=f"HTTP error occurred: {e}",
            ) from e

    def fetch_sequence(self, url: str) -> List[int]:
        """
        Download and parse a reliability sequence.

        Raises:
            FetchError: If the request fails
            ReliabilityFileError: If the body holds no indices
        """
        sequence = parse_sequence(self.fetch_text(url))
        logger.info("fetched %d indices from %s", len(sequence), url)
        return sequence

    def save_sequence(self, url: str, path: Union[str, FsPath]) -> List[int]:
        """
        Download a sequence and store it one index per line.

        Raises:
            SinkError: If the file cannot be written
        """
        sequence = self.fetch_sequence(url)
        try:
            FsPath(path).write_text(
                f"# source: {url}\n" + "\n".join(map(str, sequence)) + "\n", encoding="utf-8"
            )
        except OSError as e:
            raise SinkError(f"cannot write {path}: {e}", details={"path": str(path)}) from e
        return sequence

    def _handle_error_response(self, response: httpx.Response) -> None:
        """
        Raise the exception matching an error response.

        Raises:
            FetchError: Appropriate subclass for the status code
        """
        message = response.text.strip()[:200] or f"HTTP {response.status_code}"
        retry_after = None
        if response.status_code == 429:
            header = response.headers.get("Retry-After")
            if header:
                try:
                    retry_after = int(header)
                except ValueError:
                    pass
        raise get_exception_for_status(
            status_code=response.status_code,
            message=message,
            retry_after=retry_after,
        )

    def close(self) -> None:
        """Close the HTTP client."""
        self.client.close()

    def __enter__(self) -> "ReliabilitySession":
        """Context manager entry."""
        return self

    def __exit__(self, *args: Any) -> None:
        """Context manager exit."""
        self.close()
