"""
β-expansion weights and the β values consistent with stored path orders.

A path α of length n has weight ``B(α) = Σ β^(n-i) α_i``; a pair
``worse ≼ better`` is respected at β when ``B(worse) <= B(better)``, i.e.
when the integer polynomial ``B(better) - B(worse)`` is nonnegative at β.

Feasible sets are computed exactly over (0, ∞): every constraint is split
into irreducible factors, the positive roots of the factors are isolated by
rational intervals (sympy), and one rational sample per gap fixes the signs.
Roots of distinct irreducible factors never coincide, so the sorted roots
cut (0, ∞) into gaps on which no constraint changes sign.
"""

import logging
import math
from fractions import Fraction
from itertools import accumulate
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import sympy

from polarpo.exceptions import (
    DimensionError,
    IncompleteDatabaseError,
    InconsistentOrderError,
    LengthMismatchError,
    UsageError,
)
from polarpo.models.database import BetaEndpoint, BetaInterval, WindowReport
from polarpo.models.paths import BitOrder
from polarpo.models.relations import Kind
from polarpo.paths import PathLike, as_path, code_to_str, index_to_path, path_to_index
from polarpo.podb import PoDb

logger = logging.getLogger(__name__)

Number = Union[int, float, Fraction]

_BETA = sympy.Symbol("beta")

# Isolating intervals are refined below this width before reporting.
ENDPOINT_EPS = Fraction(1, 1 << 64)


def _fraction(r: sympy.Rational) -> Fraction:
    return Fraction(int(r.p), int(r.q))


def _rational(f: Fraction) -> sympy.Rational:
    return sympy.Rational(f.numerator, f.denominator)


def beta_weight(alpha: PathLike, beta: Number) -> Number:
    """
    β-expansion weight ``Σ β^(n-i) α_i`` of a path.

    Exact (a Fraction) for int or Fraction β, float otherwise.

    Raises:
        DimensionError: If β <= 0

    Example:
        >>> beta_weight("1100", 2)
        Fraction(12, 1)
    """
    if beta <= 0:
        raise DimensionError("β must be positive", details={"beta": beta})
    b = Fraction(beta) if isinstance(beta, (int, Fraction)) else float(beta)
    acc: Number = Fraction(0) if isinstance(b, Fraction) else 0.0
    for bit in as_path(alpha).bits:
        acc = acc * b + bit
    return acc


def constraint_coeffs(worse: PathLike, better: PathLike) -> Tuple[int, ...]:
    """Ascending integer coefficients of ``B(better) - B(worse)``."""
    a, g = as_path(worse).bits, as_path(better).bits
    if len(a) != len(g):
        raise LengthMismatchError(len(a), len(g))
    return tuple(gb - ab for ab, gb in zip(reversed(a), reversed(g)))


def constraint_poly(worse: PathLike, better: PathLike) -> sympy.Poly:
    """
    ``B(better) - B(worse)`` as an integer polynomial in β.

    Example:
        >>> constraint_poly("1100", "1011").all_coeffs()
        [-1, 1, 1]
    """
    coeffs = constraint_coeffs(worse, better)
    return sympy.Poly(list(reversed(coeffs)) or [0], _BETA, domain="ZZ")


def _sign_at(coeffs: Sequence[int], x: Fraction) -> int:
    """Sign of the ascending-coefficient polynomial at a rational point."""
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return (acc > 0) - (acc < 0)


def _normalize(coeffs: Sequence[int]) -> Tuple[int, ...]:
    """Drop the β^j factor and the positive content; the sign on (0, ∞) is unchanged."""
    cs = list(coeffs)
    while cs and cs[0] == 0:
        cs.pop(0)
    while cs and cs[-1] == 0:
        cs.pop()
    if not cs:
        return ()
    g = 0
    for c in cs:
        g = math.gcd(g, c)
    return tuple(c // g for c in cs)


class _Root:
    """A positive real root of an irreducible factor, with its isolating interval."""

    def __init__(self, factor: sympy.Poly, lo: Fraction, hi: Fraction) -> None:
        self.factor = factor
        self.lo = lo
        self.hi = hi

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    def narrow(self) -> None:
        if self.exact:
            return
        lo, hi = self.factor.refine_root(
            _rational(self.lo), _rational(self.hi), eps=_rational((self.hi - self.lo) / 4)
        )
        self.lo, self.hi = _fraction(lo), _fraction(hi)

    def exclude(self, x: Fraction) -> None:
        """Refine until x lies outside the interval (x is not this root)."""
        while not self.exact and self.lo <= x <= self.hi:
            self.narrow()

    @property
    def approx(self) -> float:
        return float((self.lo + self.hi) / 2)

    def endpoint(self, closed: bool) -> BetaEndpoint:
        coeffs = tuple(int(c) for c in reversed(self.factor.all_coeffs()))
        return BetaEndpoint(
            kind="root", lo=self.lo, hi=self.hi, approx=self.approx, poly=coeffs, closed=closed
        )


def _positive_roots(factor: sympy.Poly) -> List[_Root]:
    if factor.degree() == 1:
        c1, c0 = (int(c) for c in factor.all_coeffs())
        r = Fraction(-c0, c1)
        return [_Root(factor, r, r)] if r > 0 else []
    out = []
    for (lo, hi), _mult in factor.intervals(eps=_rational(ENDPOINT_EPS)):
        root = _Root(factor, _fraction(lo), _fraction(hi))
        root.exclude(Fraction(0))
        if root.lo > 0:
            out.append(root)
    return out


def _separate(roots: List[_Root]) -> List[_Root]:
    """Sort roots and refine until consecutive intervals are strictly disjoint."""
    roots.sort(key=lambda r: (r.lo, r.hi))
    changed = True
    while changed:
        changed = False
        for left, right in zip(roots, roots[1:]):
            if left.hi >= right.lo:
                left.narrow()
                right.narrow()
                changed = True
        if changed:
            roots.sort(key=lambda r: (r.lo, r.hi))
    return roots


def _feasible_set(constraints: Iterable[Tuple[int, ...]]) -> List[BetaInterval]:
    """Exact ``{β > 0 : every constraint >= 0}`` as a sorted list of components."""
    polys = sorted({_normalize(c) for c in constraints})
    zero_free = [c for c in polys if c]
    factors: Dict[Tuple[int, ...], sympy.Poly] = {}
    factor_keys: List[List[Tuple[int, ...]]] = []
    for coeffs in zero_free:
        poly = sympy.Poly(list(reversed(coeffs)), _BETA, domain="ZZ")
        keys = []
        for f, _mult in poly.factor_list()[1]:
            key = tuple(int(c) for c in f.all_coeffs())
            factors.setdefault(key, f)
            keys.append(key)
        factor_keys.append(keys)

    roots: List[_Root] = []
    for f in factors.values():
        roots.extend(_positive_roots(f))
    roots = _separate(roots)
    for root in roots:
        root.exclude(Fraction(1))
    positions: Dict[Tuple[int, ...], List[int]] = {}
    for i, root in enumerate(roots):
        positions.setdefault(tuple(int(c) for c in root.factor.all_coeffs()), []).append(i)

    samples: List[Fraction] = []
    if roots:
        samples.append(roots[0].lo / 2)
        for left, right in zip(roots, roots[1:]):
            samples.append((left.hi + right.lo) / 2)
        samples.append(roots[-1].hi + 1)
    else:
        samples.append(Fraction(1))

    # gap i lies left of root i; each constraint keeps its sign between its own roots
    gaps = len(samples)
    negative = [0] * (gaps + 1)
    root_bad = [0] * len(roots)
    for coeffs, keys in zip(zero_free, factor_keys):
        own = sorted(i for key in keys for i in positions.get(key, []))
        bounds = [0] + [i + 1 for i in own] + [gaps]
        for lo, hi in zip(bounds, bounds[1:]):
            if _sign_at(coeffs, samples[lo]) < 0:
                negative[lo] += 1
                negative[hi] -= 1
                # the constraint vanishes at root hi - 1, so that root does not depend on it
                if hi - 1 in own:
                    root_bad[hi - 1] -= 1
    gap_negative = list(accumulate(negative[:gaps]))
    gap_ok = [count == 0 for count in gap_negative]
    # a root is feasible when every constraint not vanishing there is positive beside it
    root_ok = [gap_negative[i] + root_bad[i] == 0 for i in range(len(roots))]

    # cells: gap0, root1, gap1, ..., rootm, gapm
    cells: List[Tuple[str, int, bool]] = [("gap", 0, gap_ok[0])]
    for i in range(len(roots)):
        cells.append(("root", i, root_ok[i]))
        cells.append(("gap", i + 1, gap_ok[i + 1]))

    components: List[BetaInterval] = []
    start: Optional[int] = None
    for pos, cell in enumerate(cells + [("end", -1, False)]):
        if cell[2] and start is None:
            start = pos
        elif not cell[2] and start is not None:
            first, last = cells[start], cells[pos - 1]
            if first[0] == "gap":
                left = (
                    BetaEndpoint(kind="zero", lo=Fraction(0), hi=Fraction(0), approx=0.0, closed=False)
                    if first[1] == 0
                    else roots[first[1] - 1].endpoint(closed=False)
                )
            else:
                left = roots[first[1]].endpoint(closed=True)
            if last[0] == "gap":
                right = (
                    BetaEndpoint(kind="inf", approx=float("inf"), closed=False)
                    if last[1] == len(roots)
                    else roots[last[1]].endpoint(closed=False)
                )
            else:
                right = roots[last[1]].endpoint(closed=True)
            components.append(BetaInterval(left=left, right=right))
            start = None
    return components


def feasible_interval(worse: PathLike, better: PathLike) -> List[BetaInterval]:
    """
    β > 0 at which ``B(worse) <= B(better)``.

    Endpoints are roots of the constraint polynomial, given by an isolating
    rational interval (degenerate for rational roots) and a float.

    Raises:
        LengthMismatchError: If the paths differ in length

    Example:
        >>> [i.describe() for i in feasible_interval("01", "10")]
        ['[1, ∞)']
    """
    return _feasible_set([constraint_coeffs(worse, better)])


def _contains(component: BetaInterval, x: Fraction) -> bool:
    """Whether x lies in the component; x must lie outside every isolating interval."""
    left, right = component.left, component.right
    if left.kind != "zero" and not (x > left.hi or (x == left.lo == left.hi and left.closed)):
        return False
    if right.kind != "inf" and not (x < right.lo or (x == right.lo == right.hi and right.closed)):
        return False
    return True


def feasible_window(db: PoDb, kind: Union[Kind, str] = Kind.Z) -> WindowReport:
    """
    Intersection of the feasible β sets of every stored pair of one kind.

    Reports the full feasible set and the component containing β = 1.

    Raises:
        IncompleteDatabaseError: If the database is partial
        UsageError: If no pair of that kind is stored
    """
    kind = kind if isinstance(kind, Kind) else Kind(kind.upper())
    if not db.complete:
        raise IncompleteDatabaseError("β window needs a complete database", details={"n": db.n})
    pairs = list(db.pairs(kind.mask))
    if not pairs:
        raise UsageError(f"no {kind.value} pairs stored", details={"n": db.n, "kind": kind.value})
    constraints = {
        _normalize(constraint_coeffs(code_to_str(w, db.n), code_to_str(b, db.n))) for w, b in pairs
    }
    logger.info("β window: %d pairs, %d distinct constraints", len(pairs), len(constraints))
    union = _feasible_set(constraints)
    component = next((c for c in union if _contains(c, Fraction(1))), None)
    return WindowReport(
        kind=kind.value,
        pairs=len(pairs),
        constraints=len(constraints),
        union=union,
        component=component,
    )


def window_from_pairs(pairs: Iterable[Tuple[PathLike, PathLike]], kind: str = "pairs") -> WindowReport:
    """Feasible β set of an explicit list of (worse, better) pairs."""
    pairs = list(pairs)
    if not pairs:
        raise UsageError("no pairs given")
    constraints = {_normalize(constraint_coeffs(w, b)) for w, b in pairs}
    union = _feasible_set(constraints)
    return WindowReport(
        kind=kind,
        pairs=len(pairs),
        constraints=len(constraints),
        union=union,
        component=next((c for c in union if _contains(c, Fraction(1))), None),
    )


def violations(db: PoDb, beta: Number, kind: Union[Kind, str] = Kind.Z) -> List[Tuple[str, str]]:
    """
    Stored pairs (worse, better) with ``B(worse) > B(better)`` at β, evaluated exactly.

    Float β is taken at its exact binary value.
    """
    kind = kind if isinstance(kind, Kind) else Kind(kind.upper())
    b = Fraction(beta)
    weights: Dict[int, Fraction] = {}

    def weight(code: int) -> Fraction:
        if code not in weights:
            weights[code] = beta_weight(code_to_str(code, db.n), b)
        return weights[code]

    return [
        (code_to_str(w, db.n), code_to_str(g, db.n))
        for w, g in db.pairs(kind.mask)
        if weight(w) > weight(g)
    ]


def beta_order(n: int, beta: Number, order: BitOrder = BitOrder.MSB) -> List[int]:
    """
    Channel indices sorted from least to most reliable by β-expansion weight.

    Ties are broken by the MSB-first path code.
    """
    if n < 0:
        raise DimensionError("n must be nonnegative", details={"n": n})
    b = Fraction(beta)
    codes = sorted(range(1 << n), key=lambda c: (beta_weight(code_to_str(c, n), b), c))
    if order is BitOrder.MSB or n == 0:
        return codes
    return [path_to_index(code_to_str(c, n), order).i for c in codes]


def repair_order(ranking: Sequence[int], db: PoDb, kind: Union[Kind, str] = Kind.Z,
                 order: BitOrder = BitOrder.MSB) -> List[int]:
    """
    Closest ranking to ``ranking`` (least reliable first) that respects every stored pair.

    Stable topological sort of the stored pairs with the original rank as
    priority: an index only moves when a stored pair forces it to.

    Raises:
        UsageError: If the ranking is not a permutation of all 2^n indices
        InconsistentOrderError: If the stored pairs contain a cycle
    """
    kind = kind if isinstance(kind, Kind) else Kind(kind.upper())
    size = 1 << db.n
    if sorted(ranking) != list(range(size)):
        raise UsageError("ranking must list every channel index once", details={"n": db.n})
    rank = {index: pos for pos, index in enumerate(ranking)}

    def to_index(code: int) -> int:
        if order is BitOrder.MSB:
            return code
        return path_to_index(code_to_str(code, db.n), order).i

    graph = nx.DiGraph()
    graph.add_nodes_from(ranking)
    graph.add_edges_from((to_index(w), to_index(b)) for w, b in db.pairs(kind.mask))
    try:
        return list(nx.lexicographical_topological_sort(graph, key=rank.__getitem__))
    except nx.NetworkXUnfeasible as e:
        raise InconsistentOrderError("stored pairs contain a cycle", details={"n": db.n}) from e


def index_weight(index: int, n: int, beta: Number, order: BitOrder = BitOrder.MSB) -> Number:
    """β-expansion weight of a channel index."""
    return beta_weight(index_to_path(index, order, n), beta)
