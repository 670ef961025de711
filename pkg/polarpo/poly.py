"""
Exact rational polynomials and the Bhattacharyya composition maps.

Polynomials are stored as integer numerators over one positive common
denominator, content-reduced, ascending degree. The Z maps of polarization
paths have integer coefficients and degree 2^len(path).

``nonneg_on_unit`` decides ``d(x) >= 0 on [0, 1]`` exactly:

1. a float scan on 257 Chebyshev-spaced points looks for a clearly
   negative value (below -1e-9) and confirms it at the exact dyadic point;
2. the roots at 0 and 1 are divided out (``d = x^j (1-x)^k e``), endpoint
   signs of ``e`` are checked, then Bernstein coefficients of ``e`` are
   subdivided on dyadic intervals;
3. intervals still undecided at depth 64 are settled by real-root isolation
   of the square-free part (sympy), which admits roots of even multiplicity.
"""

import logging
import math
from fractions import Fraction
from functools import lru_cache
from itertools import accumulate
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from polarpo.models.verdicts import Certificate, NonnegResult

try:
    import flint
except ImportError:  # pragma: no cover - optional accelerator
    flint = None

logger = logging.getLogger(__name__)

Number = Union[int, Fraction]
FloatEval = Callable[[np.ndarray], np.ndarray]

NEGATIVE_THRESHOLD = -1e-9
CHEBYSHEV_POINTS = 257
MAX_DEPTH = 64
_KRONECKER_MIN = 48


# Integer polynomial kernels (ascending coefficient lists).


def _trim(a: List[int]) -> List[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _add_ints(a: Sequence[int], b: Sequence[int], sign: int = 1) -> List[int]:
    if len(a) < len(b):
        out = list(a) + [0] * (len(b) - len(a))
    else:
        out = list(a)
    for i, c in enumerate(b):
        out[i] += sign * c
    return _trim(out)


def _pack(a: Sequence[int], nbytes: int) -> int:
    half = 1 << (8 * nbytes - 1)
    blob = b"".join((c + half).to_bytes(nbytes, "little") for c in a)
    bias = half * (((1 << (8 * nbytes * len(a))) - 1) // ((1 << (8 * nbytes)) - 1))
    return int.from_bytes(blob, "little") - bias


def _unpack(v: int, nbytes: int, count: int) -> List[int]:
    half = 1 << (8 * nbytes - 1)
    bias = half * (((1 << (8 * nbytes * count)) - 1) // ((1 << (8 * nbytes)) - 1))
    blob = (v + bias).to_bytes(nbytes * count, "little")
    return [
        int.from_bytes(blob[i * nbytes:(i + 1) * nbytes], "little") - half for i in range(count)
    ]


def _mul_ints(a: Sequence[int], b: Sequence[int]) -> List[int]:
    """Product of two integer polynomials."""
    if not a or not b:
        return []
    if flint is not None and min(len(a), len(b)) >= _KRONECKER_MIN:
        prod = flint.fmpz_poly(list(a)) * flint.fmpz_poly(list(b))
        return [int(c) for c in prod.coeffs()]
    if min(len(a), len(b)) < _KRONECKER_MIN:
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return _trim(out)
    # Kronecker substitution: pack into one big integer per operand.
    bound = max(abs(c) for c in a).bit_length() + max(abs(c) for c in b).bit_length()
    bound += min(len(a), len(b)).bit_length() + 2
    nbytes = (bound + 7) // 8
    count = len(a) + len(b) - 1
    return _trim(_unpack(_pack(a, nbytes) * _pack(b, nbytes), nbytes, count))


def _taylor_shift(a: Sequence[int]) -> List[int]:
    """Coefficients of p(x + 1)."""
    if flint is not None and len(a) >= _KRONECKER_MIN:
        shifted = flint.fmpz_poly(list(a))(flint.fmpz_poly([1, 1]))
        out = [int(c) for c in shifted.coeffs()]
        return out + [0] * (len(a) - len(out))
    out = list(a)
    d = len(out) - 1
    for i in range(d):
        out[i:] = reversed(list(accumulate(reversed(out[i:]))))
    return out


def _content(a: Sequence[int]) -> int:
    return math.gcd(*a) if a else 0


def _eval_ints(a: Sequence[int], p: int, q: int) -> int:
    """Return q^d * a(p/q) with d = len(a) - 1 (homogeneous Horner)."""
    if not a:
        return 0
    acc = a[-1]
    qpow = 1
    for c in reversed(a[:-1]):
        qpow *= q
        acc = acc * p + c * qpow
    return acc


def _sign_at(a: Sequence[int], x: Fraction) -> int:
    v = _eval_ints(a, x.numerator, x.denominator)
    return (v > 0) - (v < 0)


class RatPoly:
    """
    Dense univariate polynomial with rational coefficients.

    Example:
        >>> p = RatPoly([0, 2, -1])          # 2x - x^2
        >>> p(Fraction(1, 2))
        Fraction(3, 4)
    """

    __slots__ = ("_nums", "_den")

    def __init__(self, coeffs: Iterable[Number] = ()) -> None:
        fracs = [Fraction(c) for c in coeffs]
        den = 1
        for f in fracs:
            den = den * f.denominator // math.gcd(den, f.denominator)
        nums = [f.numerator * (den // f.denominator) for f in fracs]
        self._nums, self._den = self._canonical(nums, den)

    @staticmethod
    def _canonical(nums: List[int], den: int) -> Tuple[Tuple[int, ...], int]:
        nums = _trim(list(nums))
        if not nums:
            return (), 1
        g = math.gcd(_content(nums), den)
        if den < 0:
            g = -g
        if g != 1:
            nums = [c // g for c in nums]
            den //= g
        return tuple(nums), den

    @classmethod
    def from_ints(cls, nums: Sequence[int], den: int = 1) -> "RatPoly":
        """Build from integer numerators over a common denominator."""
        obj = cls.__new__(cls)
        obj._nums, obj._den = cls._canonical(list(nums), den)
        return obj

    @classmethod
    def x(cls) -> "RatPoly":
        return cls.from_ints([0, 1])

    @classmethod
    def const(cls, c: Number) -> "RatPoly":
        return cls([c])

    @property
    def coeffs(self) -> Tuple[Fraction, ...]:
        """Ascending rational coefficients, no trailing zeros."""
        return tuple(Fraction(c, self._den) for c in self._nums)

    @property
    def degree(self) -> int:
        """Index of the last nonzero coefficient (-1 for the zero polynomial)."""
        return len(self._nums) - 1

    def is_zero(self) -> bool:
        return not self._nums

    def integer_coeffs(self) -> Tuple[Tuple[int, ...], int]:
        """Numerators and common denominator."""
        return self._nums, self._den

    # arithmetic

    def _coerce(self, other: Union["RatPoly", Number]) -> "RatPoly":
        return other if isinstance(other, RatPoly) else RatPoly.const(other)

    def __add__(self, other: Union["RatPoly", Number]) -> "RatPoly":
        o = self._coerce(other)
        den = self._den * o._den // math.gcd(self._den, o._den)
        a = [c * (den // self._den) for c in self._nums]
        b = [c * (den // o._den) for c in o._nums]
        return RatPoly.from_ints(_add_ints(a, b), den)

    __radd__ = __add__

    def __neg__(self) -> "RatPoly":
        return RatPoly.from_ints([-c for c in self._nums], self._den)

    def __sub__(self, other: Union["RatPoly", Number]) -> "RatPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Number) -> "RatPoly":
        return RatPoly.const(other) - self

    def __mul__(self, other: Union["RatPoly", Number]) -> "RatPoly":
        if not isinstance(other, RatPoly):
            f = Fraction(other)
            return RatPoly.from_ints([c * f.numerator for c in self._nums], self._den * f.denominator)
        return RatPoly.from_ints(_mul_ints(self._nums, other._nums), self._den * other._den)

    __rmul__ = __mul__

    def square(self) -> "RatPoly":
        return self * self

    def compose(self, inner: "RatPoly") -> "RatPoly":
        """Return self(inner(x))."""
        if self.is_zero():
            return RatPoly()
        m, e = inner._nums, inner._den
        d = self.degree
        acc: List[int] = [self._nums[-1]]
        epow = 1
        for c in reversed(self._nums[:-1]):
            epow *= e
            acc = _add_ints(_mul_ints(acc, m), [c * epow])
        return RatPoly.from_ints(acc, self._den * e**d)

    def derivative(self) -> "RatPoly":
        return RatPoly.from_ints([i * c for i, c in enumerate(self._nums)][1:], self._den)

    def substitute_power(self, k: int) -> "RatPoly":
        """Return p(x^k)."""
        if k == 1 or self.degree < 1:
            return self
        out = [0] * (self.degree * k + 1)
        for i, c in enumerate(self._nums):
            out[i * k] = c
        return RatPoly.from_ints(out, self._den)

    # evaluation

    def __call__(self, x: Union[Number, float, np.ndarray]) -> Union[Fraction, np.ndarray]:
        if isinstance(x, (int, Fraction)):
            return eval_rational(self, x)
        return self.eval_float(x)

    def sign_at(self, x: Number) -> int:
        return _sign_at(self._nums, Fraction(x))

    def eval_float(self, xs: Union[float, np.ndarray]) -> np.ndarray:
        """Approximate values; scaled so huge coefficients do not overflow (sign-faithful)."""
        if not self._nums:
            return np.zeros_like(np.asarray(xs, dtype=float))
        bits = max(abs(c).bit_length() for c in self._nums)
        shift = max(0, bits - 1000)
        floats = [float(c >> shift) if shift else float(c) for c in self._nums]
        return np.polynomial.polynomial.polyval(np.asarray(xs, dtype=float), floats)

    # comparisons

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = RatPoly.const(other)
        if not isinstance(other, RatPoly):
            return NotImplemented
        return self._nums == other._nums and self._den == other._den

    def __hash__(self) -> int:
        return hash((self._nums, self._den))

    def __repr__(self) -> str:
        if not self._nums:
            return "RatPoly(0)"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}" if i == 0 else f"{c}*x^{i}")
        return "RatPoly(" + " + ".join(terms) + ")"


def poly_arith(a: RatPoly, b: RatPoly, kind: str) -> RatPoly:
    """
    Exact add / sub / mul / compose.

    Raises:
        ValueError: If ``kind`` is not one of the four operations
    """
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "compose":
        return a.compose(b)
    raise ValueError(f"unknown polynomial operation '{kind}'")


def eval_rational(p: RatPoly, x: Number) -> Fraction:
    """Exact value p(x)."""
    x = Fraction(x)
    nums, den = p.integer_coeffs()
    if not nums:
        return Fraction(0)
    d = len(nums) - 1
    return Fraction(_eval_ints(nums, x.numerator, x.denominator), den * x.denominator**d)


# Bhattacharyya maps


Z0 = RatPoly.from_ints([0, 2, -1])
Z1 = RatPoly.from_ints([0, 0, 1])


def _bits(alpha: Union[str, Sequence[int], object]) -> Tuple[int, ...]:
    if isinstance(alpha, str):
        return tuple(int(c) for c in alpha)
    bits = getattr(alpha, "bits", alpha)
    return tuple(int(b) for b in bits)  # type: ignore[union-attr]


@lru_cache(maxsize=4096)
def _z_prefix(bits: Tuple[int, ...]) -> RatPoly:
    if not bits:
        return RatPoly.x()
    prev = _z_prefix(bits[:-1])
    if bits[-1]:
        return prev.square()
    return prev * (2 - prev)


def z_poly(alpha: Union[str, Sequence[int], object]) -> RatPoly:
    """
    Z_α = Z_{α_n} ∘ ... ∘ Z_{α_1}, the identity for the empty path.

    Leading ones are applied by substituting x -> x^(2^k), which keeps the
    prefix cache shared between ``α`` and ``1α``.

    Example:
        >>> z_poly("01").coeffs
        (Fraction(0, 1), Fraction(0, 1), Fraction(4, 1), Fraction(-4, 1), Fraction(1, 1))
    """
    bits = _bits(alpha)
    k = 0
    while k < len(bits) and bits[k] == 1:
        k += 1
    base = _z_prefix(bits[k:])
    return base.substitute_power(1 << k) if k else base


def clear_z_cache() -> None:
    _z_prefix.cache_clear()


def capacity_poly(gamma: Union[str, Sequence[int], object]) -> RatPoly:
    """BEC capacity map of a path: 1 - Z_γ(1 - x)."""
    return 1 - z_poly(gamma).compose(RatPoly.from_ints([1, -1]))


def z_map(alpha: Union[str, Sequence[int], object], xs: np.ndarray) -> np.ndarray:
    """Float evaluation of Z_α by iterating the elementary maps."""
    x = np.array(xs, dtype=float, copy=True)
    for b in _bits(alpha):
        x = x * x if b else x * (2.0 - x)
    return x


def z_eval(alpha: Union[str, Sequence[int], object], x: Number) -> Fraction:
    """Exact Z_α(x), iterating the elementary maps on a rational."""
    v = Fraction(x)
    for b in _bits(alpha):
        v = v * v if b else v * (2 - v)
    return v


def chebyshev_grid(points: int = CHEBYSHEV_POINTS) -> np.ndarray:
    """Chebyshev-spaced sample points on [0, 1], endpoints included."""
    k = np.arange(points)
    return (1.0 - np.cos(np.pi * k / (points - 1))) / 2.0


# Nonnegativity on [0, 1]


def _strip_endpoint_roots(nums: List[int]) -> Tuple[List[int], int, int]:
    """Write d = x^j (1 - x)^k e with e(0) != 0 and e(1) != 0."""
    j = 0
    while j < len(nums) and nums[j] == 0:
        j += 1
    e = nums[j:]
    k = 0
    while len(e) > 1 and sum(e) == 0:
        # divide by (x - 1), then negate to divide by (1 - x)
        q = [0] * (len(e) - 1)
        q[-1] = e[-1]
        for i in range(len(e) - 2, 0, -1):
            q[i - 1] = e[i] + q[i]
        e = [-c for c in q]
        k += 1
    return e, j, k


def _dyadic_witness(e: Sequence[int], target: Fraction, toward: Fraction) -> Fraction:
    """
    Dyadic point near ``target`` where e < 0.

    ``target`` is either a point with e(target) < 0 or an endpoint where the
    sign of e at ``toward``-side neighbours is negative.
    """
    for t in range(1, 1 << 14):
        step = Fraction(1, 1 << t)
        if target == toward:
            q = Fraction(round(target * (1 << t)), 1 << t)
        else:
            q = target + step if toward > target else target - step
        if 0 <= q <= 1 and _sign_at(e, q) < 0:
            return q
    raise ArithmeticError("no dyadic witness found")  # pragma: no cover


def _bernstein_negative(p: Sequence[int]) -> Tuple[bool, bool, bool]:
    """Return (any coefficient negative, first negative, last negative) for p on [0, 1]."""
    b = list(reversed(_taylor_shift(list(reversed(p)))))
    return any(c < 0 for c in b), b[0] < 0, b[-1] < 0


def _bernstein(e: List[int]) -> Tuple[Optional[Fraction], bool, int]:
    """
    Bernstein subdivision of e on [0, 1].

    Returns (witness or None, reached depth cap, intervals examined).
    """
    d = len(e) - 1
    stack = [(e, Fraction(0), Fraction(1), 0)]
    examined = 0
    capped = False
    while stack:
        p, lo, width, depth = stack.pop()
        examined += 1
        any_neg, first_neg, last_neg = _bernstein_negative(p)
        if not any_neg:
            continue
        if first_neg:
            return lo, False, examined
        if last_neg:
            return lo + width, False, examined
        if depth >= MAX_DEPTH:
            capped = True
            continue
        left = [c << (d - i) for i, c in enumerate(p)]
        right = _taylor_shift(left)
        g = _content(left)
        left = [c // g for c in left]
        g = _content(right)
        right = [c // g for c in right]
        half = width / 2
        stack.append((right, lo + half, half, depth + 1))
        stack.append((left, lo, half, depth + 1))
    return None, capped, examined


def _sturm_witness(e: Sequence[int]) -> Optional[Fraction]:
    """
    Decide the sign of e on [0, 1] by isolating the real roots of odd multiplicity.

    Between consecutive odd roots e keeps one sign, so testing one point per
    gap settles the question; even-multiplicity roots only touch zero.
    """
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed(e)), x, domain="ZZ")
    _, factors = poly.sqf_list()
    odd = sympy.Poly(1, x, domain="ZZ")
    for f, mult in factors:
        if mult % 2 == 1:
            odd = odd * f
    cuts: List[Fraction] = [Fraction(0)]
    if odd.degree() > 0:
        for (a, b), _m in odd.intervals(inf=0, sup=1):
            cuts.append(Fraction(int(a.p), int(a.q)))
            cuts.append(Fraction(int(b.p), int(b.q)))
    cuts.append(Fraction(1))
    cuts.sort()
    for lo, hi in zip(cuts, cuts[1:]):
        if hi <= lo:
            continue
        mid = (lo + hi) / 2
        for t in range(64):
            s = _sign_at(e, mid)
            if s != 0:
                break
            mid = lo + (mid - lo) / 2  # even root exactly at the test point
        if s < 0:
            return _dyadic_witness(e, mid, mid)
    return None


def nonneg_on_unit(d: RatPoly, evaluate: Optional[FloatEval] = None) -> NonnegResult:
    """
    Decide exactly whether d(x) >= 0 for all x in [0, 1].

    Args:
        d: Polynomial to test
        evaluate: Optional float evaluator of d (more stable than expanded
            coefficients for deep compositions); used only to find witnesses

    Returns:
        NONNEG with its certificate, or a dyadic witness x with d(x) < 0

    Example:
        >>> nonneg_on_unit(z_poly("01") - z_poly("10")).nonneg
        True
    """
    nums = list(d.integer_coeffs()[0])
    if not nums:
        return NonnegResult(nonneg=True, certificate=Certificate.TRIVIAL)

    grid = chebyshev_grid()
    values = evaluate(grid) if evaluate is not None else d.eval_float(grid)
    k = int(np.argmin(values))
    if values[k] < NEGATIVE_THRESHOLD:
        x = Fraction(float(grid[k]))
        if _sign_at(nums, x) < 0:
            return NonnegResult(nonneg=False, witness=x, certificate=Certificate.WITNESS)

    e, j, k_one = _strip_endpoint_roots(nums)
    if e[0] < 0:
        return NonnegResult(
            nonneg=False, witness=_dyadic_witness(e, Fraction(0), Fraction(1)),
            certificate=Certificate.WITNESS,
        )
    if sum(e) < 0:
        return NonnegResult(
            nonneg=False, witness=_dyadic_witness(e, Fraction(1), Fraction(0)),
            certificate=Certificate.WITNESS,
        )
    if len(e) == 1:
        return NonnegResult(nonneg=True, certificate=Certificate.TRIVIAL)

    g = _content(e)
    e = [c // g for c in e]
    witness, capped, examined = _bernstein(e)
    if witness is not None:
        return NonnegResult(
            nonneg=False, witness=witness, certificate=Certificate.WITNESS, subdivisions=examined
        )
    if not capped:
        return NonnegResult(nonneg=True, certificate=Certificate.BERNSTEIN, subdivisions=examined)

    logger.debug("bernstein depth cap hit at degree %d, falling back to root isolation", len(e) - 1)
    witness = _sturm_witness(e)
    if witness is not None:
        return NonnegResult(
            nonneg=False, witness=witness, certificate=Certificate.WITNESS, subdivisions=examined
        )
    return NonnegResult(nonneg=True, certificate=Certificate.STURM, subdivisions=examined)
