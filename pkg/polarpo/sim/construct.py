"""
Information-set construction: exact BEC parameters, β-expansion ranking or an
external reliability sequence, optionally followed by index swaps.
"""

import logging
from fractions import Fraction
from pathlib import Path as FsPath
from typing import List, Optional, Sequence, Tuple, Union

from pydantic import ValidationError

from polarpo.beta import beta_order
from polarpo.exceptions import DimensionError, InfoSetError, ReliabilityFileError, SinkError
from polarpo.models.channels import InfoSet
from polarpo.models.paths import BitOrder
from polarpo.paths import code_to_str, path_to_index
from polarpo.podb import PU_PAIRS

logger = logging.getLogger(__name__)

Number = Union[float, Fraction]

# Swaps (remove, add) turning the 5G set at N = 1024 into its criterion-only variant.
A1_MODS: Tuple[Tuple[int, int], ...] = PU_PAIRS


def parse_number(text: str) -> Number:
    """Exact Fraction for decimal or ratio text, float otherwise."""
    try:
        return Fraction(text)
    except ValueError:
        return float(text)


def bec_exact_params(n: int, eps: Union[Number, str]) -> List[Tuple[Number, Number]]:
    """
    Per-index ``(Z, 2 P_e)`` of the synthesized channels of BEC(ε).

    Both parameters equal the erasure rate Z_α(ε); index i is the path with
    MSB-first code i. Exact for rational ε.

    Raises:
        DimensionError: If ε is outside [0, 1] or n is negative

    Example:
        >>> [z for z, _ in bec_exact_params(2, Fraction(1, 2))]
        [Fraction(15, 16), Fraction(9, 16), Fraction(7, 16), Fraction(1, 16)]
    """
    if isinstance(eps, str):
        eps = parse_number(eps)
    if n < 0:
        raise DimensionError("n must be nonnegative", details={"n": n})
    if not 0 <= eps <= 1:
        raise DimensionError("erasure probability must lie in [0, 1]", details={"eps": str(eps)})
    z: List[Number] = [eps]
    for _ in range(n):
        z = [w for x in z for w in (2 * x - x * x, x * x)]
    return [(x, x) for x in z]


def _to_index(code: int, n: int, order: BitOrder) -> int:
    if order is BitOrder.MSB or n == 0:
        return code
    return path_to_index(code_to_str(code, n), order).i


def read_reliability_file(path: Union[str, FsPath], N: Optional[int] = None) -> List[int]:
    """
    Read a reliability sequence: one channel index per line, least reliable first.

    Blank lines and ``#`` comments are skipped. With N, indices >= N are
    dropped (a sequence for a longer code restricts to a shorter one) and the
    rest must be a permutation of 0..N-1.

    Raises:
        ReliabilityFileError: If the file is unreadable, malformed or too short
    """
    try:
        lines = FsPath(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise ReliabilityFileError(f"cannot read {path}: {e}", details={"path": str(path)}) from e
    sequence: List[int] = []
    for lineno, line in enumerate(lines, 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            sequence.append(int(text))
        except ValueError as e:
            raise ReliabilityFileError(
                f"{path}:{lineno}: expected an integer, got '{text}'",
                details={"path": str(path), "line": lineno},
            ) from e
    if N is None:
        return sequence
    restricted = [i for i in sequence if 0 <= i < N]
    if len(restricted) < N:
        raise ReliabilityFileError(
            f"{path} has {len(restricted)} indices below {N}, need {N}",
            details={"path": str(path), "N": N, "found": len(restricted)},
        )
    if len(set(restricted)) != len(restricted):
        raise ReliabilityFileError(f"{path} repeats an index", details={"path": str(path)})
    return restricted


def read_mods_file(path: Union[str, FsPath]) -> List[Tuple[int, int]]:
    """
    Read index swaps, one ``remove add`` pair of integers per line.

    Raises:
        ReliabilityFileError: If the file is unreadable or a line is malformed
    """
    try:
        lines = FsPath(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise ReliabilityFileError(f"cannot read {path}: {e}", details={"path": str(path)}) from e
    mods = []
    for lineno, line in enumerate(lines, 1):
        fields = line.split("#", 1)[0].replace(",", " ").split()
        if not fields:
            continue
        if len(fields) != 2:
            raise ReliabilityFileError(
                f"{path}:{lineno}: expected 'remove add'", details={"path": str(path), "line": lineno}
            )
        try:
            mods.append((int(fields[0]), int(fields[1])))
        except ValueError as e:
            raise ReliabilityFileError(
                f"{path}:{lineno}: indices must be integers", details={"path": str(path), "line": lineno}
            ) from e
    return mods


def apply_mods(indices: Sequence[int], mods: Sequence[Tuple[int, int]], N: int) -> List[int]:
    """
    Swap indices out of and into an information set, verbatim.

    Raises:
        InfoSetError: If a removed index is absent, an added index already
            present or out of range
    """
    info = set(indices)
    for remove, add in mods:
        if remove not in info:
            raise InfoSetError(f"index {remove} is not in the information set", details={"index": remove})
        if add in info or not 0 <= add < N:
            raise InfoSetError(f"cannot add index {add}", details={"index": add})
        info.discard(remove)
        info.add(add)
    return sorted(info)


def build_info_set(
    n: int,
    K: int,
    method: str,
    mods: Optional[Sequence[Tuple[int, int]]] = None,
    order: BitOrder = BitOrder.MSB,
) -> InfoSet:
    """
    Top-K information set by the reliability score of a construction method.

    Args:
        n: log2 of the block length
        K: Number of information bits
        method: ``bec:ε`` (ascending exact Z), ``beta:β`` (descending
            β-expansion weight) or ``file:PATH`` (sequence order)
        mods: Index swaps applied afterwards
        order: Channel index convention for the bec and beta methods

    Raises:
        InfoSetError: If K is out of range, the method is unknown or a swap fails
        ReliabilityFileError: If the sequence file is unusable

    Example:
        >>> build_info_set(2, 2, "bec:0.5").indices
        [2, 3]
    """
    N = 1 << n
    if not 0 <= K <= N:
        raise InfoSetError(f"K must lie in [0, {N}]", details={"K": K, "n": n})
    name, _, arg = method.partition(":")
    name = name.strip().lower()
    if name == "bec":
        z = [zv for zv, _ in bec_exact_params(n, arg or "0.5")]
        # most reliable last
        ranking = sorted(range(N), key=lambda c: (-z[c], c))
        ranking = [_to_index(c, n, order) for c in ranking]
    elif name == "beta":
        if not arg:
            raise InfoSetError("beta method needs a value, e.g. beta:1.1892")
        ranking = beta_order(n, parse_number(arg), order)
    elif name == "file":
        ranking = read_reliability_file(arg, N)
    else:
        raise InfoSetError(f"unknown construction method '{method}'", details={"method": method})

    indices = sorted(ranking[N - K :]) if K else []
    if mods:
        indices = apply_mods(indices, mods, N)
    logger.debug("info set n=%d K=%d via %s", n, K, method)
    return InfoSet(n=n, K=K, indices=indices, method=method + (" +mods" if mods else ""))


def write_info_set(info: InfoSet, path: Union[str, FsPath]) -> None:
    """
    Store an information set as JSON.

    Raises:
        SinkError: If the file cannot be written
    """
    try:
        FsPath(path).write_text(info.model_dump_json(), encoding="utf-8")
    except OSError as e:
        raise SinkError(f"cannot write {path}: {e}", details={"path": str(path)}) from e


def read_info_set(path: Union[str, FsPath], n: int, K: int) -> InfoSet:
    """
    Read an information set stored as JSON or as a plain list of indices.

    Raises:
        ReliabilityFileError: If the file is unreadable
        InfoSetError: If the set does not match n and K or is invalid
    """
    try:
        text = FsPath(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ReliabilityFileError(f"cannot read {path}: {e}", details={"path": str(path)}) from e
    try:
        if text.lstrip().startswith("{"):
            info = InfoSet.model_validate_json(text)
        else:
            body = " ".join(line.split("#", 1)[0] for line in text.splitlines())
            indices = [int(tok) for tok in body.replace(",", " ").split()]
            info = InfoSet(n=n, K=len(indices), indices=indices, method=f"file:{path}")
    except (ValidationError, ValueError) as e:
        raise InfoSetError(f"{path} is not a valid information set: {e}", details={"path": str(path)}) from e
    if (info.n, info.K) != (n, K):
        raise InfoSetError(
            f"{path} holds a set with n={info.n}, K={info.K}; expected n={n}, K={K}",
            details={"path": str(path), "n": info.n, "K": info.K},
        )
    return info
