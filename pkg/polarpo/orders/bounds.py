"""
Enclosures of Z(W^α) and T(W^α) = 2 P_e(W^α) over all BMSCs, and the
sufficient-condition provers for the Z and P orders.

Every enclosure is a pair of rationals. Square roots are rounded outward
(down for lower ends, up for upper ends) with integer square roots, so an
enclosure never loses a true value. Provers never evaluate roots: each
check is a dominance test between two Z polynomials.
"""

import logging
from fractions import Fraction
from math import isqrt
from typing import Any, List, Optional, Tuple, Union

from pydantic import ValidationError

from polarpo.exceptions import DimensionError, InvalidEnclosureError
from polarpo.models.relations import Rule
from polarpo.models.verdicts import Direction, Interval, ProofResult
from polarpo.orders.base import BaseOrder
from polarpo.orders.bec import BecOrder
from polarpo.paths import PathLike, run_prefix
from polarpo.poly import nonneg_on_unit, z_eval, z_map, z_poly

logger = logging.getLogger(__name__)

EnclosureLike = Union[Interval, Tuple[Any, Any], Fraction, int, float, str]

# Fractional bits kept by rounded square roots.
SQRT_BITS = 96


def _exact_sqrt(q: Fraction) -> Optional[Fraction]:
    rn, rd = isqrt(q.numerator), isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def sqrt_down(q: Fraction) -> Fraction:
    """Largest multiple of 2^-96 not above sqrt(q) (exact for rational squares)."""
    if q <= 0:
        return Fraction(0)
    exact = _exact_sqrt(q)
    if exact is not None:
        return exact
    scale = 1 << (2 * SQRT_BITS)
    return Fraction(isqrt(q.numerator * scale // q.denominator), 1 << SQRT_BITS)


def sqrt_up(q: Fraction) -> Fraction:
    """Smallest multiple of 2^-96 not below sqrt(q), capped at 1 for q <= 1."""
    if q <= 0:
        return Fraction(0)
    exact = _exact_sqrt(q)
    if exact is not None:
        return exact
    scale = 1 << (2 * SQRT_BITS)
    target = -((-q.numerator * scale) // q.denominator)
    s = isqrt(target)
    if s * s < target:
        s += 1
    out = Fraction(s, 1 << SQRT_BITS)
    return min(out, Fraction(1)) if q <= 1 else out


def as_enclosure(x: EnclosureLike) -> Interval:
    """
    Coerce an interval, a (lo, hi) pair or a single value to :class:`Interval`.

    Raises:
        InvalidEnclosureError: If the result is not a sub-interval of [0, 1]
    """
    if isinstance(x, Interval):
        return x
    try:
        if isinstance(x, tuple):
            return Interval(lo=x[0], hi=x[1])
        return Interval.point(x)
    except (ValidationError, ValueError, TypeError) as e:
        raise InvalidEnclosureError(f"invalid enclosure {x!r}", errors=[str(e)]) from e


# Single-step bounds


def l0(x: Any) -> Interval:
    """Enclosure of L_0(x) = sqrt(2x^2 - x^4), the lower bound on Z(W^0) given Z(W) = x."""
    v = Fraction(x)
    q = 2 * v * v - v**4
    return Interval(lo=sqrt_down(q), hi=sqrt_up(q))


def l0_iter(k: int, x: Any) -> Interval:
    """Enclosure of sqrt(1 - (1 - x^2)^(2^k)), the k-fold lower bound for the path 0^k."""
    v = Fraction(x)
    q = 1 - (1 - v * v) ** (1 << k)
    return Interval(lo=sqrt_down(q), hi=sqrt_up(q))


def bridge(z: EnclosureLike) -> Interval:
    """T enclosure from a Z enclosure: 1 - sqrt(1 - Z^2) <= T <= Z."""
    zi = as_enclosure(z)
    return Interval(lo=1 - sqrt_up(1 - zi.lo * zi.lo), hi=zi.hi)


def z_interval(alpha: PathLike, x: EnclosureLike) -> Interval:
    """
    Enclosure of Z(W^α) for every BMSC W with Z(W) in ``x``.

    Returns ``[sqrt(Z_α(lo^2)), Z_α(hi)]``.

    Raises:
        InvalidEnclosureError: If ``x`` is not inside [0, 1]

    Example:
        >>> z_interval("1", Fraction(1, 2))
        Interval(lo=Fraction(1, 4), hi=Fraction(1, 4))
    """
    xi = as_enclosure(x)
    a = BaseOrder._pair(alpha, alpha)[0]
    return Interval(lo=sqrt_down(z_eval(a, xi.lo * xi.lo)), hi=z_eval(a, xi.hi))


def t_interval_generic(alpha: PathLike, t: EnclosureLike) -> Interval:
    """The path-independent enclosure ``[Z_α(lo), Z_α(sqrt(2 hi - hi^2))]`` of T(W^α)."""
    ti = as_enclosure(t)
    a = BaseOrder._pair(alpha, alpha)[0]
    top = sqrt_up(2 * ti.hi - ti.hi * ti.hi)
    return Interval(lo=z_eval(a, ti.lo), hi=z_eval(a, top))


def _t_stepwise(a: str, ti: Interval) -> Interval:
    lo, hi = ti.lo, ti.hi
    for b in a:
        if b == "0":
            lo, hi = lo * (2 - lo), hi * (2 - hi)
        else:
            lo, hi = lo * lo, hi * (2 - hi)
    return Interval(lo=lo, hi=hi)


def t_interval(alpha: PathLike, t: EnclosureLike, x_hint: Optional[EnclosureLike] = None) -> Interval:
    """
    Enclosure of T(W^α) = 2 P_e(W^α) for every BMSC W with T(W) in ``t``.

    Intersects the step-by-step bound (exact through a 0, between Z_1 and
    Z_0 through a 1), the generic bound, the shape bound
    ``[Z_α(lo), Z_{0^(p+1)γ}(hi)]`` for ``α = 0^p 1 γ`` and, when ``x_hint``
    encloses Z(W), the Z-domain bound plus the Z-to-T bridge.

    Raises:
        InvalidEnclosureError: If an enclosure is outside [0, 1] or the
            hint contradicts ``t``

    Example:
        >>> t_interval("0", Fraction(1, 5))
        Interval(lo=Fraction(9, 25), hi=Fraction(9, 25))
    """
    ti = as_enclosure(t)
    a = BaseOrder._pair(alpha, alpha)[0]
    pieces: List[Interval] = [_t_stepwise(a, ti), t_interval_generic(a, ti)]

    if "1" in a:
        p = run_prefix(a, "0")
        shaped = "0" * (p + 1) + a[p + 1 :]
        pieces.append(Interval(lo=z_eval(a, ti.lo), hi=z_eval(shaped, ti.hi)))

    if x_hint is not None:
        xi = as_enclosure(x_hint)
        inner = z_eval(a, xi.lo * xi.lo)
        pieces.append(Interval(lo=1 - sqrt_up(1 - inner), hi=z_eval(a, xi.hi)))
        pieces.append(bridge(z_interval(a, xi)))

    lo = max(p.lo for p in pieces)
    hi = min(p.hi for p in pieces)
    if lo > hi:
        raise InvalidEnclosureError(
            "T and Z enclosures are inconsistent",
            details={"path": a, "lo": str(lo), "hi": str(hi)},
        )
    return Interval(lo=lo, hi=hi)


class BmscBounds(BaseOrder):
    """Interval propagation and the Z / P order provers."""

    def __init__(self, settings=None, bec: Optional[BecOrder] = None) -> None:
        super().__init__(settings)
        self._bec = bec or BecOrder(self.settings)

    # enclosures

    def l0(self, x: Any) -> Interval:
        return l0(x)

    def l0_iter(self, k: int, x: Any) -> Interval:
        return l0_iter(k, x)

    def z_interval(self, alpha: PathLike, x: EnclosureLike) -> Interval:
        return z_interval(alpha, x)

    def t_interval(
        self, alpha: PathLike, t: EnclosureLike, x_hint: Optional[EnclosureLike] = None
    ) -> Interval:
        return t_interval(alpha, t, x_hint)

    # provers

    @staticmethod
    def _dominates(worse: str, better: str) -> Tuple[bool, Any, Any]:
        """Exact check Z_worse - Z_better >= 0; returns (holds, residual, certificate)."""
        residual = z_poly(worse) - z_poly(better)
        verdict = nonneg_on_unit(
            residual, evaluate=lambda xs: z_map(worse, xs) - z_map(better, xs)
        )
        return verdict.nonneg, residual, verdict.certificate

    def prove_Z(self, alpha: PathLike, gamma: PathLike, reduce: bool = True) -> ProofResult:
        """
        Try to certify ``α ≼_Z γ``: Z(W^α) >= Z(W^γ) for every BMSC W.

        The criterion is ``1α ≼_BEC γ1``. When γ starts with 1 the same test
        reduces to a premise of half the degree: ``α' ≼_BEC γ'`` for
        ``α = α'1, γ = 1γ'`` and ``α ≼_BEC γ'1`` otherwise.

        Args:
            alpha: Worse path
            gamma: Better path
            reduce: Check the reduced premise when the shape allows it

        Returns:
            proven=False means undecided, never a disproof

        Raises:
            LengthMismatchError: If the paths differ in length

        Example:
            >>> BmscBounds().prove_Z("100", "011").proven
            True
        """
        a, g = self._pair(alpha, gamma)
        shapes: List[Tuple[Rule, Tuple[str, str]]] = []
        if g.startswith("1") and a.endswith("1"):
            shapes.append((Rule.THM3, (a[:-1], g[1:])))
        if g.startswith("1"):
            shapes.append((Rule.PROP10, (a, g[1:] + "1")))
        shapes.append((Rule.PROP9, ("1" + a, g + "1")))

        rule, premise = shapes[0] if reduce else shapes[-1]
        holds, residual, certificate = self._dominates(*premise)
        logger.debug("prove_Z %s %s via %s: %s", a, g, rule.value, holds)
        if not holds:
            return ProofResult(proven=False, rule=rule.value, premise=premise)
        return ProofResult(
            proven=True,
            strategy=rule.value,
            rule=rule.value,
            premise=premise,
            certificate=certificate,
            residual=residual,
            residual_degree=residual.degree,
            alternatives=[r.value for r, _ in shapes if r is not rule],
        )

    def prove_P(self, alpha: PathLike, gamma: PathLike) -> ProofResult:
        """
        Try to certify ``α ≼_P γ``: P_e(W^α) >= P_e(W^γ) for every BMSC W.

        Strategies, in order:

        - S1 (Z domain): ``1α ≼_BEC γ0``, reduced to ``α' ≼_BEC γ'`` when
          ``α = α'0`` and ``γ = 1γ'``;
        - S2 (T domain): for ``γ = 0^q 1 τ``, ``α ≼_BEC 0^(q+1) τ``.

        Both are attempted; the first success is reported and the other is
        kept as an alternative.

        Raises:
            LengthMismatchError: If the paths differ in length

        Example:
            >>> BmscBounds().prove_P("11000", "10111").strategy
            'S1'
        """
        a, g = self._pair(alpha, gamma)
        attempts: List[Tuple[str, Rule, Tuple[str, str]]] = []
        if a.endswith("0") and g.startswith("1"):
            attempts.append(("S1", Rule.THM4, (a[:-1], g[1:])))
        else:
            attempts.append(("S1", Rule.THM4, ("1" + a, g + "0")))
        if "1" in g:
            q = run_prefix(g, "0")
            attempts.append(("S2", Rule.THM5, (a, "0" * (q + 1) + g[q + 1 :])))

        successes = []
        for strategy, rule, premise in attempts:
            holds, residual, certificate = self._dominates(*premise)
            logger.debug("prove_P %s %s via %s: %s", a, g, strategy, holds)
            if holds:
                successes.append((strategy, rule, premise, residual, certificate))
        if not successes:
            return ProofResult(proven=False)

        strategy, rule, premise, residual, certificate = successes[0]
        return ProofResult(
            proven=True,
            strategy=strategy,
            rule=rule.value,
            premise=premise,
            certificate=certificate,
            residual=residual,
            residual_degree=residual.degree,
            alternatives=[s[0] for s in successes[1:]],
            alternative_residuals=[s[3] for s in successes[1:]],
        )

    # staircase theorems

    def theorem1_check(self, m: int, n: int, p: int, q: int) -> bool:
        """
        Whether ``0^m1^(n-1) ≼_BEC 1^(p-1)0^q``, which certifies ``0^m1^n ≼_Z 1^p0^q``.

        Raises:
            DimensionError: Unless p, n >= 1, q, m >= 0 and m + n = p + q
        """
        if p < 1 or n < 1 or q < 0 or m < 0 or m + n != p + q:
            raise DimensionError(
                "staircase Z check needs p, n >= 1, q, m >= 0 and m + n = p + q",
                details={"m": m, "n": n, "p": p, "q": q},
            )
        verdict = self._bec.bec_leq("0" * m + "1" * (n - 1), "1" * (p - 1) + "0" * q)
        return verdict.relation in (Direction.LEQ, Direction.EQUAL)

    def theorem2_check(self, m: int, n: int, p: int, q: int) -> bool:
        """
        Whether ``0^m1^n ≼_BEC 1^(p-1)0^(q+1)``, which certifies ``0^m1^n ≼_P 1^p0^q``.

        Raises:
            DimensionError: Unless p >= 1, n, q, m >= 0 and m + n = p + q
        """
        if p < 1 or n < 0 or q < 0 or m < 0 or m + n != p + q:
            raise DimensionError(
                "staircase P check needs p >= 1, n, q, m >= 0 and m + n = p + q",
                details={"m": m, "n": n, "p": p, "q": q},
            )
        verdict = self._bec.bec_leq("0" * m + "1" * n, "1" * (p - 1) + "0" * (q + 1))
        return verdict.relation in (Direction.LEQ, Direction.EQUAL)

    def corollary_applies(self, n: int, zeros: int, kind: str, mode: Optional[str] = None) -> bool:
        """Length condition of the counting criterion for a better path with ``zeros`` zeros."""
        mode = mode or self.settings.corollary_mode
        if n < 2:
            return False
        j = zeros if kind.upper() == "Z" else zeros + 1
        if mode == "lemma":
            return (1 << j) + j <= n
        slack = n - (1 << j) if (1 << j) <= n else -1
        return slack >= 0 and n <= (1 << slack)

    def corollary_check(
        self, alpha: PathLike, gamma: PathLike, kind: str, mode: Optional[str] = None
    ) -> bool:
        """
        Counting criterion certifying ``γ ≼_Z α`` (kind Z) or ``γ ≼_P α`` (kind P).

        With k = n_0(α), the length condition is, in ``lemma`` mode,
        ``2^k + k <= n`` for Z and ``2^(k+1) + k + 1 <= n`` for P; ``real``
        mode tests ``k <= log2(n - log2 n)`` (resp. ``k + 1``) exactly as
        ``n <= 2^(n - 2^k)``. Then, for Z with τ = γ minus its last bit,
        ``n_0(τ) >= n_1(α)`` and ``n_1(τ) <= k - 1``; for P,
        ``n_0(γ) >= n_1(α) - 1``, ``n_1(γ) <= k + 1`` and ``n_1(α) >= 1``.

        Raises:
            LengthMismatchError: If the paths differ in length
            ValueError: For an unknown kind or mode
        """
        a, g = self._pair(alpha, gamma)
        mode = mode or self.settings.corollary_mode
        kind = kind.upper()
        if kind not in ("Z", "P"):
            raise ValueError(f"corollary check covers Z and P, not '{kind}'")
        if mode not in ("lemma", "real"):
            raise ValueError(f"unknown corollary mode '{mode}'")

        n = len(a)
        k = a.count("0")
        n1 = n - k
        if not self.corollary_applies(n, k, kind, mode):
            return False

        if kind == "Z":
            tau = g[:-1]
            return tau.count("0") >= n1 and tau.count("1") <= k - 1
        return n1 >= 1 and g.count("0") >= n1 - 1 and g.count("1") <= k + 1
