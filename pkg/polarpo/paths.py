"""
Path algebra: parsing, inversion, counting and channel-index conversion.
"""

import re
from typing import Tuple, Union

from pydantic import ValidationError

from polarpo.exceptions import PathSyntaxError, UsageError
from polarpo.models.paths import BitOrder, ChannelIndex, Path

PathLike = Union[Path, str]

_ALLOWED = re.compile(r"^[01\^\d\s{}]*$")
_TOKEN = re.compile(r"\s*([01])(?:\^\{?(\d+)\}?)?\s*")


def parse_path(text: str) -> Path:
    """
    Parse a path from text.

    Accepts plain 0/1 strings and run-length shorthand such as ``0^2 1^1``
    or ``0^{3}1``; whitespace is ignored, ``ε`` or an empty string is the
    empty path.

    Args:
        text: Path text

    Returns:
        The parsed path, leftmost symbol first

    Raises:
        PathSyntaxError: If the text contains anything else

    Example:
        >>> str(parse_path("0^2 1^1"))
        '001'
    """
    stripped = text.strip()
    if stripped in ("", "ε"):
        return Path(())
    if not _ALLOWED.match(stripped):
        raise PathSyntaxError(f"invalid path text '{text}'", details={"text": text})

    bits = []
    pos = 0
    while pos < len(stripped):
        m = _TOKEN.match(stripped, pos)
        if m is None:
            raise PathSyntaxError(
                f"malformed path text '{text}' at offset {pos}", details={"text": text}
            )
        repeat = int(m.group(2)) if m.group(2) is not None else 1
        bits.extend([int(m.group(1))] * repeat)
        pos = m.end()
    return Path(tuple(bits))


def as_path(p: PathLike) -> Path:
    """Coerce a path or path text to :class:`Path`."""
    return p if isinstance(p, Path) else parse_path(p)


def invert(p: PathLike) -> Path:
    """Flip every bit, keeping the order."""
    return Path(tuple(1 - b for b in as_path(p).bits))


def counts(p: PathLike) -> Tuple[int, int]:
    """Return ``(n0, n1)``."""
    path = as_path(p)
    return path.n0, path.n1


def concat(a: PathLike, b: PathLike) -> Path:
    return as_path(a) + as_path(b)


def channel_index(n: int, i: int) -> ChannelIndex:
    """
    Build a ChannelIndex from user input.

    Raises:
        UsageError: If n < 1 or i is outside [0, 2^n)
    """
    try:
        return ChannelIndex(n=n, i=i)
    except ValidationError as e:
        raise UsageError(
            f"channel index {i} is invalid for n={n}",
            details={"n": n, "i": i},
            errors=[err["msg"] for err in e.errors()],
        ) from e


def index_to_path(c: Union[ChannelIndex, int], order: BitOrder = BitOrder.MSB, n: int = 0) -> Path:
    """
    Map a synthesized-channel index to its polarization path.

    With MSB-first order the most significant bit of the n-bit expansion is
    path position 1; LSB-first reverses that.

    Args:
        c: Channel index (or a bare integer together with ``n``)
        order: Bit-order convention
        n: Path length when ``c`` is a bare integer

    Raises:
        UsageError: If a bare index is out of range or n < 1

    Example:
        >>> str(index_to_path(ChannelIndex(n=10, i=719)))
        '1011001111'
    """
    index = c if isinstance(c, ChannelIndex) else channel_index(n, c)
    path = Path.from_code(index.i, index.n)
    if order is BitOrder.LSB:
        return Path(tuple(reversed(path.bits)))
    return path


def path_to_index(p: PathLike, order: BitOrder = BitOrder.MSB) -> ChannelIndex:
    """Inverse of :func:`index_to_path`."""
    path = as_path(p)
    if order is BitOrder.LSB:
        path = Path(tuple(reversed(path.bits)))
    return channel_index(len(path), path.code)


# String helpers used by the combinatorial code, which works on "0101" text.


def code_to_str(code: int, n: int) -> str:
    return format(code, f"0{n}b") if n else ""


def str_to_code(s: str) -> int:
    return int(s, 2) if s else 0


def run_prefix(s: str, bit: str) -> int:
    """Length of the leading run of ``bit`` in ``s``."""
    return len(s) - len(s.lstrip(bit))


def run_suffix(s: str, bit: str) -> int:
    """Length of the trailing run of ``bit`` in ``s``."""
    return len(s) - len(s.rstrip(bit))
