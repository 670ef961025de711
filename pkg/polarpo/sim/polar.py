"""
Polar transform, successive cancellation decoding and genie-aided LLRs.

Indexing: the MSB of a channel index is the first transform. The transform is
``x = u G_N`` with ``G_N`` the n-fold Kronecker power of ``[[1, 0], [1, 1]]``
and no bit reversal, so ``x = ((u1 ⊕ u2) G, u2 G)`` for the two halves of u.
"""

import logging
from typing import Iterable, Optional, Tuple

import numpy as np

from polarpo.exceptions import DimensionError
from polarpo.paths import PathLike, as_path

logger = logging.getLogger(__name__)

RULES = ("exact", "minsum")


def _check_length(size: int) -> int:
    if size < 1 or size & (size - 1):
        raise DimensionError(f"length must be a power of two, got {size}", details={"length": size})
    return size.bit_length() - 1


def polar_encode(u: np.ndarray) -> np.ndarray:
    """
    Codeword ``u G_N`` over GF(2), along the last axis.

    Raises:
        DimensionError: If the length is not a power of two

    Example:
        >>> polar_encode(np.array([0, 1])).tolist()
        [1, 1]
    """
    x = np.array(u, dtype=np.uint8) & 1
    n = _check_length(x.shape[-1])
    size = x.shape[-1]
    for stage in range(n):
        half = 1 << stage
        blocks = x.reshape(x.shape[:-1] + (size // (2 * half), 2, half))
        blocks[..., 0, :] ^= blocks[..., 1, :]
    return x


def check_node(a: np.ndarray, b: np.ndarray, rule: str = "exact") -> np.ndarray:
    """LLR of the XOR of two bits (the worse branch)."""
    sign = np.sign(a) * np.sign(b)
    magnitude = np.minimum(np.abs(a), np.abs(b))
    if rule == "minsum":
        return sign * magnitude
    with np.errstate(invalid="ignore", over="ignore"):
        corr = np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))
    corr = np.where(np.isinf(a) | np.isinf(b), 0.0, corr)
    return sign * magnitude + corr


def bit_node(a: np.ndarray, b: np.ndarray, v: Optional[np.ndarray] = None) -> np.ndarray:
    """LLR of the second bit given the decision ``v`` on the first (the better branch)."""
    if v is None:
        return a + b
    return b + (1.0 - 2.0 * v) * a


def genie_llrs(llr: np.ndarray, path: PathLike, rule: str = "exact") -> np.ndarray:
    """
    LLR of the synthesized channel W^α when every earlier bit is known to be 0.

    Args:
        llr: Channel LLRs, last axis of length 2^|α|
        path: Polarization path, first transform first
        rule: Check-node rule

    Returns:
        One LLR per leading index of ``llr``

    Example:
        >>> float(genie_llrs(np.array([1.0, 2.0]), "1")[()])
        3.0
    """
    bits = as_path(path).bits
    llr = np.asarray(llr, dtype=float)
    if llr.shape[-1] != 1 << len(bits):
        raise DimensionError(
            f"need 2^{len(bits)} channel LLRs, got {llr.shape[-1]}",
            details={"path": "".join(map(str, bits)), "llrs": llr.shape[-1]},
        )
    for bit in bits:
        half = llr.shape[-1] // 2
        a, b = llr[..., :half], llr[..., half:]
        llr = bit_node(a, b) if bit else check_node(a, b, rule)
    return llr[..., 0]


class SCDecoder:
    """
    Successive cancellation decoder, batched over frames.

    Ties (LLR exactly 0 on an information bit) are decided as 0 and flagged.

    Example:
        >>> dec = SCDecoder(4, frozen=[0, 1])
        >>> dec.decode(np.full(4, 5.0)).tolist()
        [0, 0, 0, 0]
    """

    def __init__(self, N: int, frozen: Iterable[int], rule: str = "exact") -> None:
        """
        Initialize a decoder.

        Args:
            N: Block length (a power of two)
            frozen: Frozen channel indices, decoded as 0
            rule: ``exact`` (tanh rule) or ``minsum``

        Raises:
            DimensionError: If N is not a power of two or an index is out of range
            ValueError: For an unknown rule
        """
        self.n = _check_length(N)
        self.N = N
        if rule not in RULES:
            raise ValueError(f"unknown check-node rule '{rule}'")
        self.rule = rule
        mask = np.zeros(N, dtype=bool)
        for i in frozen:
            if not 0 <= i < N:
                raise DimensionError(f"frozen index {i} outside [0, {N})", details={"index": i})
            mask[i] = True
        self.frozen = mask
        self.info = np.flatnonzero(~mask)

    def decode_batch(self, llr: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Decode a batch of frames.

        Args:
            llr: Array of shape (frames, N)

        Returns:
            ``(u_hat, ties)``: decisions of shape (frames, N) and a boolean
            array flagging, per frame and index, information bits decided on
            a zero LLR
        """
        llr = np.asarray(llr, dtype=float)
        if llr.ndim != 2 or llr.shape[1] != self.N:
            raise DimensionError(
                f"expected LLRs of shape (frames, {self.N})", details={"shape": list(llr.shape)}
            )
        u = np.zeros(llr.shape, dtype=np.uint8)
        ties = np.zeros(llr.shape, dtype=bool)
        self._decode(llr, 0, u, ties)
        return u, ties

    def decode(self, llr: np.ndarray) -> np.ndarray:
        """Decisions û for a single frame."""
        u, _ = self.decode_batch(np.asarray(llr, dtype=float)[None, :])
        return u[0]

    def _decode(self, llr: np.ndarray, offset: int, u: np.ndarray, ties: np.ndarray) -> np.ndarray:
        """Decode indices offset..offset+len and return the re-encoded partial codeword."""
        size = llr.shape[1]
        frozen = self.frozen[offset : offset + size]
        if frozen.all():
            return np.zeros(llr.shape, dtype=np.uint8)
        if size == 1:
            decided = (llr[:, 0] < 0).astype(np.uint8)
            u[:, offset] = decided
            ties[:, offset] = llr[:, 0] == 0
            return decided[:, None]
        half = size // 2
        a, b = llr[:, :half], llr[:, half:]
        v1 = self._decode(check_node(a, b, self.rule), offset, u, ties)
        with np.errstate(invalid="ignore"):
            v2 = self._decode(bit_node(a, b, v1), offset + half, u, ties)
        return np.concatenate([v1 ^ v2, v2], axis=1)


def sc_decode(llr: np.ndarray, frozen: Iterable[int], rule: str = "exact") -> np.ndarray:
    """
    Decode one frame with successive cancellation.

    Example:
        >>> sc_decode(np.array([-1.0, 3.0]), frozen=[0]).tolist()
        [0, 0]
    """
    llr = np.asarray(llr, dtype=float)
    return SCDecoder(llr.shape[-1], frozen, rule).decode(llr)
