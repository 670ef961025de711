"""
Tests for downloading reliability sequences.
"""

from pathlib import Path

import httpx
import pytest
import respx

from polarpo.exceptions import (
    FetchError,
    RateLimitError,
    ReliabilityFileError,
    SequenceNotFoundError,
    ServerError,
)
from polarpo.session import ReliabilitySession, parse_sequence

URL = "https://example.org/sequences/n4.txt"


def test_parse_sequence() -> None:
    """Test lines, commas and comments."""
    assert parse_sequence("# toy\n0, 1\n2 3  # tail\n") == [0, 1, 2, 3]


def test_parse_sequence_empty() -> None:
    """Test that text without indices is rejected."""
    with pytest.raises(ReliabilityFileError):
        parse_sequence("# nothing here\n\n")


@respx.mock
def test_fetch_sequence() -> None:
    """Test a successful download."""
    route = respx.get(URL).mock(return_value=httpx.Response(200, text="0\n1\n2\n3\n"))

    with ReliabilitySession() as session:
        assert session.fetch_sequence(URL) == [0, 1, 2, 3]
    assert route.called
    assert route.calls.last.request.headers["User-Agent"].startswith("polarpo/")


@respx.mock
def test_fetch_not_found() -> None:
    """Test that 404 maps to SequenceNotFoundError."""
    respx.get(URL).mock(return_value=httpx.Response(404, text="no such file"))

    with ReliabilitySession() as session:
        with pytest.raises(SequenceNotFoundError) as exc_info:
            session.fetch_sequence(URL)
    assert exc_info.value.status_code == 404
    assert "no such file" in str(exc_info.value)


@respx.mock
def test_fetch_rate_limited() -> None:
    """Test that 429 carries the Retry-After value."""
    respx.get(URL).mock(return_value=httpx.Response(429, headers={"Retry-After": "30"}))

    with ReliabilitySession() as session:
        with pytest.raises(RateLimitError) as exc_info:
            session.fetch_text(URL)
    assert exc_info.value.retry_after == 30
    assert "retry after 30s" in str(exc_info.value)


@respx.mock
def test_fetch_server_error() -> None:
    """Test that 5xx maps to ServerError."""
    respx.get(URL).mock(return_value=httpx.Response(503))

    with ReliabilitySession() as session:
        with pytest.raises(ServerError):
            session.fetch_text(URL)


@respx.mock
def test_fetch_transport_error() -> None:
    """Test that a connection failure is a plain FetchError."""
    respx.get(URL).mock(side_effect=httpx.ConnectError("refused"))

    with ReliabilitySession() as session:
        with pytest.raises(FetchError) as exc_info:
            session.fetch_text(URL)
    assert not isinstance(exc_info.value, ServerError)
    assert exc_info.value.status_code == 0


@respx.mock
def test_save_sequence(tmp_path: Path) -> None:
    """Test that the stored file records its source."""
    respx.get(URL).mock(return_value=httpx.Response(200, text="3, 1, 0, 2"))
    target = tmp_path / "seq.txt"

    with ReliabilitySession() as session:
        assert session.save_sequence(URL, target) == [3, 1, 0, 2]

    lines = target.read_text(encoding="utf-8").splitlines()
    assert lines[0] == f"# source: {URL}"
    assert lines[1:] == ["3", "1", "0", "2"]


def test_custom_transport() -> None:
    """Test that a caller-supplied transport is used."""
    transport = httpx.MockTransport(lambda request: httpx.Response(200, text="1 0"))

    with ReliabilitySession(timeout=5.0, transport=transport) as session:
        assert session.timeout == 5.0
        assert session.fetch_sequence(URL) == [1, 0]
