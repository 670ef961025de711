"""
Tests for path parsing and channel-index conversion.
"""

import pytest
from pydantic import ValidationError

from polarpo.exceptions import PathSyntaxError, UsageError
from polarpo.models.paths import BitOrder, ChannelIndex, Path
from polarpo.paths import (
    concat,
    counts,
    channel_index,
    index_to_path,
    invert,
    parse_path,
    path_to_index,
    run_prefix,
    run_suffix,
)


def test_parse_plain_and_shorthand() -> None:
    """Test plain strings and run-length shorthand parse to the same path."""
    assert str(parse_path("0011")) == "0011"
    assert str(parse_path("0^2 1^2")) == "0011"
    assert str(parse_path("0^{3}1")) == "0001"
    assert parse_path(" 1 0 ") == Path("10")


def test_parse_empty_path() -> None:
    """Test that ε and the empty string are the empty path."""
    assert len(parse_path("ε")) == 0
    assert len(parse_path("")) == 0


@pytest.mark.parametrize("text", ["012", "abc", "0^x", "1,0"])
def test_parse_rejects_garbage(text: str) -> None:
    """Test that anything but 0/1 text is refused."""
    with pytest.raises(PathSyntaxError):
        parse_path(text)


def test_path_model_rejects_bad_bits() -> None:
    """Test that the model validator refuses symbols other than 0 and 1."""
    with pytest.raises(ValidationError):
        Path([0, 2])


def test_counts_invert_concat() -> None:
    """Test the small path helpers."""
    assert counts("01101") == (2, 3)
    assert str(invert("0110")) == "1001"
    assert str(concat("01", "1")) == "011"
    assert Path("0110").n0 == 2 and Path("0110").n1 == 2


def test_runs() -> None:
    """Test leading and trailing run lengths."""
    assert run_prefix("0001011", "0") == 3
    assert run_suffix("0001011", "1") == 2
    assert run_prefix("1", "0") == 0


def test_index_to_path_msb() -> None:
    """Test MSB-first conversion of the criterion-only indices."""
    assert str(index_to_path(ChannelIndex(n=10, i=719))) == "1011001111"
    assert str(index_to_path(250, n=10)) == "0011111010"


def test_index_to_path_lsb() -> None:
    """Test that the LSB convention reverses the path."""
    assert str(index_to_path(719, BitOrder.LSB, 10)) == "1111001101"


def test_path_to_index_inverts() -> None:
    """Test path_to_index against index_to_path for both conventions."""
    for order in BitOrder:
        for i in (0, 5, 250, 719, 1023):
            assert path_to_index(index_to_path(i, order, 10), order).i == i


def test_channel_index_range() -> None:
    """Test that indices outside [0, 2^n) are rejected."""
    with pytest.raises(ValidationError):
        ChannelIndex(n=3, i=8)


def test_channel_index_needs_positive_length() -> None:
    """Test that a block length of 1 (n = 0) has no channel index."""
    with pytest.raises(ValidationError):
        ChannelIndex(n=0, i=0)


@pytest.mark.parametrize("n, i", [(0, 0), (3, 8), (3, -1), (10, 1024)])
def test_channel_index_errors_are_usage_errors(n: int, i: int) -> None:
    """Test that invalid user indices raise UsageError."""
    with pytest.raises(UsageError) as exc_info:
        channel_index(n, i)
    assert exc_info.value.details == {"n": n, "i": i}

    with pytest.raises(UsageError):
        index_to_path(i, BitOrder.MSB, n)


def test_path_to_index_rejects_empty_path() -> None:
    """Test that the empty path has no channel index."""
    with pytest.raises(UsageError):
        path_to_index("")


def test_path_ordering() -> None:
    """Test that paths sort by length, then by code."""
    paths = sorted([Path("11"), Path("0"), Path("01")])
    assert [str(p) for p in paths] == ["0", "01", "11"]
