"""
The channel-degradation order between equal-length paths.

Two rewrite generators produce every known degradation between paths of
one length: flipping a 0 into a 1 (``W^0 ≼ W^1``) and replacing an adjacent
``01`` by ``10`` (``W^01 ≼ W^10``). ``α ≼ γ`` holds when γ is reachable from
α; both generators increase the MSB-first integer code, so reachability
sets are built in one pass from the largest code down.
"""

import logging
from collections import deque
from functools import lru_cache
from typing import TYPE_CHECKING, Dict, Iterator, List, Mapping, Optional, Tuple

from polarpo.models.relations import KindMask, Rule
from polarpo.models.verdicts import DegVerdict, Direction
from polarpo.orders.base import BaseOrder
from polarpo.paths import PathLike, code_to_str, str_to_code

if TYPE_CHECKING:
    from polarpo.podb import PoDb

logger = logging.getLogger(__name__)

# Largest length for which whole reachability tables are cached.
TABLE_MAX_LENGTH = 14


def successors(code: int, n: int) -> Iterator[int]:
    """Paths one generator step above ``code``."""
    for b in range(n):
        if not (code >> b) & 1:
            yield code | (1 << b)
    for b in range(n - 1):
        if not (code >> (b + 1)) & 1 and (code >> b) & 1:
            yield code ^ (0b11 << b)


def predecessors(code: int, n: int) -> Iterator[int]:
    """Paths one generator step below ``code``."""
    for b in range(n):
        if (code >> b) & 1:
            yield code & ~(1 << b)
    for b in range(n - 1):
        if (code >> (b + 1)) & 1 and not (code >> b) & 1:
            yield code ^ (0b11 << b)


@lru_cache(maxsize=None)
def reach_table(n: int) -> Tuple[int, ...]:
    """
    Reachability bitsets: bit j of ``table[i]`` is set iff path j is reachable from path i.

    Example:
        >>> bin(reach_table(2)[0b01])
        '0b1110'
    """
    size = 1 << n
    table = [0] * size
    for code in range(size - 1, -1, -1):
        acc = 1 << code
        for t in successors(code, n):
            acc |= table[t]
        table[code] = acc
    return tuple(table)


def prefix_dominates(alpha: str, gamma: str) -> bool:
    """True iff every prefix of γ has at least as many 1s as the same prefix of α."""
    ones_a = ones_g = 0
    for a, g in zip(alpha, gamma):
        ones_a += a == "1"
        ones_g += g == "1"
        if ones_g < ones_a:
            return False
    return True


def replay_trace(trace: List[str]) -> bool:
    """Check that consecutive entries of a trace differ by exactly one generator step."""
    for s, t in zip(trace, trace[1:]):
        if len(s) != len(t) or str_to_code(t) not in set(successors(str_to_code(s), len(s))):
            return False
    return True


class DegradationOrder(BaseOrder):
    """Decides the degradation order and its optional third-rule saturation."""

    def reachable(self, worse: int, better: int, n: int) -> bool:
        """Whether code ``better`` is reachable from code ``worse``."""
        if n <= TABLE_MAX_LENGTH:
            return bool((reach_table(n)[worse] >> better) & 1)
        return self._bfs(worse, better, n) is not None

    def _bfs(self, start: int, goal: int, n: int) -> Optional[List[int]]:
        if start == goal:
            return [start]
        if goal < start:
            return None
        parent: Dict[int, int] = {start: start}
        queue = deque([start])
        while queue:
            s = queue.popleft()
            for t in successors(s, n):
                if t in parent or t > goal:
                    continue
                parent[t] = s
                if t == goal:
                    chain = [t]
                    while chain[-1] != start:
                        chain.append(parent[chain[-1]])
                    return chain[::-1]
                queue.append(t)
        return None

    def trace(self, worse: str, better: str) -> List[str]:
        """Shortest rewrite chain from ``worse`` to ``better`` (empty if unreachable)."""
        n = len(worse)
        chain = self._bfs(str_to_code(worse), str_to_code(better), n)
        return [code_to_str(c, n) for c in chain] if chain else []

    def deg_leq(self, alpha: PathLike, gamma: PathLike) -> DegVerdict:
        """
        Compare two paths under the degradation order.

        Args:
            alpha: First path
            gamma: Second path

        Returns:
            LEQ when γ is reachable from α, GEQ for the reverse, EQUAL for
            identical paths, INCOMPARABLE otherwise; the trace runs from the
            worse path to the better one

        Raises:
            LengthMismatchError: If the paths differ in length

        Example:
            >>> DegradationOrder().deg_leq("011", "101").direction
            <Direction.LEQ: 'LEQ'>
        """
        a, g = self._pair(alpha, gamma)
        if a == g:
            return DegVerdict(comparable=True, direction=Direction.EQUAL, trace=[a])
        n = len(a)
        ca, cg = str_to_code(a), str_to_code(g)
        if self.reachable(ca, cg, n):
            return DegVerdict(comparable=True, direction=Direction.LEQ, trace=self.trace(a, g))
        if self.reachable(cg, ca, n):
            return DegVerdict(comparable=True, direction=Direction.GEQ, trace=self.trace(g, a))
        return DegVerdict(comparable=False, direction=Direction.INCOMPARABLE)

    def leq(self, worse: str, better: str) -> bool:
        """Fast boolean form on 0/1 strings (reflexive)."""
        return self.reachable(str_to_code(worse), str_to_code(better), len(worse))

    def base_db(self, n: int) -> "PoDb":
        """All strict degradation pairs of length ``n``."""
        from polarpo.podb import PoDb

        db = PoDb(n)
        table = reach_table(n)
        for w in range(1 << n):
            bits = table[w] & ~(1 << w)
            while bits:
                low = bits & -bits
                db.add(w, low.bit_length() - 1, KindMask.DEG, Rule.DEG)
                bits ^= low
        return db

    def deg_closure_rule3(self, dbs: Mapping[int, "PoDb"], n: int) -> "PoDb":
        """
        Pairs of length ``n`` derivable by the third degradation rule.

        Whenever ``α ≼ γ`` and ``ατ1^m ≼ γτ0^m`` are stored for shorter
        lengths, every completion ``ατη1^m ≼ γτη0^m`` of length ``n`` is a
        degradation. Only additions (pairs missing from ``dbs[n]``) are returned.

        Args:
            dbs: Degradation databases keyed by length, lengths below ``n`` populated
            n: Target length

        Returns:
            Database of the additions at length ``n``
        """
        from polarpo.podb import PoDb

        out = PoDb(n)
        existing = dbs.get(n)
        for length in sorted(k for k in dbs if k < n):
            eta_len = n - length
            for w2, b2 in dbs[length].pairs(KindMask.DEG):
                ws, bs = code_to_str(w2, length), code_to_str(b2, length)
                for m in range(1, length):
                    if ws[length - m] != "1" or bs[length - m] != "0":
                        break
                    head_w, head_b = ws[: length - m], bs[: length - m]
                    for t in range(0, length - m):
                        a_len = length - m - t
                        if head_w[a_len:] != head_b[a_len:]:
                            continue
                        alpha, gamma, tau = head_w[:a_len], head_b[:a_len], head_w[a_len:]
                        if alpha == gamma or a_len not in dbs:
                            continue
                        if not dbs[a_len].has(str_to_code(alpha), str_to_code(gamma), KindMask.DEG):
                            continue
                        for eta in range(1 << eta_len):
                            e = code_to_str(eta, eta_len)
                            worse = str_to_code(alpha + tau + e + "1" * m)
                            better = str_to_code(gamma + tau + e + "0" * m)
                            if existing is not None and existing.has(worse, better, KindMask.DEG):
                                continue
                            if out.add(worse, better, KindMask.DEG, Rule.RULE3):
                                out.set_premises(
                                    worse, better, KindMask.DEG,
                                    [(a_len, str_to_code(alpha), str_to_code(gamma), "DEG"),
                                     (length, w2, b2, "DEG")],
                                )
        logger.debug("third degradation rule added %d pairs at n=%d", len(out), n)
        return out

    def family(self, n: int, rule3: bool = False) -> Dict[int, "PoDb"]:
        """
        Degradation databases for every length 1..n.

        With ``rule3`` each length is the transitive closure of the generator
        pairs plus the third-rule additions from shorter lengths.
        """
        dbs: Dict[int, "PoDb"] = {}
        for length in range(1, n + 1):
            db = self.base_db(length)
            if rule3 and length > 2:
                extra = self.deg_closure_rule3(dbs, length)
                if len(extra):
                    db.merge(extra)
                    db.transitive_close(KindMask.DEG)
            dbs[length] = db
        return dbs
