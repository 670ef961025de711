"""
The BEC order: pointwise dominance of the Bhattacharyya maps on [0, 1].

``α ≼_BEC γ`` means ``Z_γ(x) <= Z_α(x)`` for every erasure rate x, i.e. the
synthesized channel of α is never better than that of γ on any BEC.
"""

import logging
from functools import lru_cache
from typing import Optional

from mpmath import iv

from polarpo.exceptions import DimensionError
from polarpo.models.verdicts import BecVerdict, Certificate, Direction
from polarpo.orders.base import BaseOrder
from polarpo.paths import PathLike, run_prefix, run_suffix
from polarpo.poly import nonneg_on_unit, z_map, z_poly

logger = logging.getLogger(__name__)

# Largest 2^m * 2^n decided with plain integers.
EXACT_STAIRCASE_BITS = 1 << 20
STAIRCASE_PREC = 256
STAIRCASE_MAX_PREC = 1 << 14


def _staircase_interval(m: int, n: int, prec: int) -> Optional[bool]:
    """Compare 2^n log(1 - 2^-(2^m)) with -log 2 in interval arithmetic; None if undecided."""
    saved = iv.prec
    iv.prec = prec
    try:
        u = iv.mpf(2) ** (-(1 << m))
        lhs = iv.mpf(2) ** n * iv.log(1 - u)
        rhs = -iv.log(2)
        if lhs.b <= rhs.a:
            return True
        if lhs.a > rhs.b:
            return False
        return None
    finally:
        iv.prec = saved


def staircase_fact(m: int, n: int) -> bool:
    """
    Whether ``(1 - 2^-(2^m))^(2^n) <= 1/2``, i.e. ``1^m0^n ≼_BEC 0^m1^n``.

    Small cases compare ``2 (2^(2^m) - 1)^(2^n)`` with ``2^(2^m 2^n)`` as
    integers; larger ones use 256-bit interval logarithms, doubling the
    precision while the enclosure straddles the threshold.

    Raises:
        DimensionError: If m or n is negative

    Example:
        >>> staircase_fact(1, 2), staircase_fact(1, 1)
        (True, False)
    """
    if m < 0 or n < 0:
        raise DimensionError("staircase exponents must be non-negative", details={"m": m, "n": n})
    if m == 0:
        return True
    if (1 << m) * (1 << n) <= EXACT_STAIRCASE_BITS:
        return 2 * ((1 << (1 << m)) - 1) ** (1 << n) <= 1 << ((1 << m) * (1 << n))

    prec = STAIRCASE_PREC
    while prec <= STAIRCASE_MAX_PREC:
        verdict = _staircase_interval(m, n, prec)
        if verdict is not None:
            return verdict
        prec *= 2
    # For m >= 1 the inequality flips exactly between n = 2^m - 1 and n = 2^m.
    logger.debug("staircase (%d, %d) undecided at %d bits, using threshold", m, n, prec // 2)
    return n >= (1 << m)


def _staircase_shape(a: str, g: str) -> Optional[tuple]:
    """(m, n) when a = 1^m0^n and g = 0^m1^n with m, n >= 1."""
    m = run_prefix(a, "1")
    n = len(a) - m
    if m == 0 or n == 0 or run_suffix(a, "0") != n:
        return None
    if g != "0" * m + "1" * n:
        return None
    return m, n


def _float_diff(a: str, g: str):
    return lambda xs: z_map(a, xs) - z_map(g, xs)


@lru_cache(maxsize=1 << 16)
def _decide(a: str, g: str, closed_forms: bool) -> BecVerdict:
    if a == g or z_poly(a) == z_poly(g):
        return BecVerdict(relation=Direction.EQUAL, certificate=Certificate.TRIVIAL)

    if closed_forms:
        shape = _staircase_shape(a, g)
        if shape is not None and staircase_fact(*shape):
            return BecVerdict(relation=Direction.LEQ, certificate=Certificate.CLOSED_FORM)
        shape = _staircase_shape(g, a)
        if shape is not None and staircase_fact(*shape):
            return BecVerdict(relation=Direction.GEQ, certificate=Certificate.CLOSED_FORM)

    diff = z_poly(a) - z_poly(g)
    forward = nonneg_on_unit(diff, evaluate=_float_diff(a, g))
    if forward.nonneg:
        return BecVerdict(relation=Direction.LEQ, certificate=forward.certificate)
    backward = nonneg_on_unit(-diff, evaluate=_float_diff(g, a))
    if backward.nonneg:
        return BecVerdict(
            relation=Direction.GEQ, certificate=backward.certificate, witness_leq=forward.witness
        )
    return BecVerdict(
        relation=Direction.INCOMPARABLE,
        certificate=Certificate.WITNESS,
        witness_leq=forward.witness,
        witness_geq=backward.witness,
    )


class BecOrder(BaseOrder):
    """Exact decisions of the BEC order."""

    def bec_leq(self, alpha: PathLike, gamma: PathLike, closed_forms: bool = True) -> BecVerdict:
        """
        Compare two paths under the BEC order.

        Args:
            alpha: First path
            gamma: Second path
            closed_forms: Use the staircase closed form when the pair has its shape

        Returns:
            LEQ iff ``Z_α - Z_γ >= 0`` on [0, 1]; INCOMPARABLE carries a dyadic
            witness for each direction

        Raises:
            LengthMismatchError: If the paths differ in length

        Example:
            >>> BecOrder().bec_leq("01", "10").relation
            <Direction.LEQ: 'LEQ'>
        """
        a, g = self._pair(alpha, gamma)
        return _decide(a, g, closed_forms)

    def leq(self, worse: str, better: str) -> bool:
        """Boolean form, true for LEQ and EQUAL."""
        return self.bec_leq(worse, better).relation in (Direction.LEQ, Direction.EQUAL)

    def staircase_fact(self, m: int, n: int) -> bool:
        return staircase_fact(m, n)

    @staticmethod
    def clear_cache() -> None:
        _decide.cache_clear()
