"""
Rule engine: saturation of per-length relation stores and targeted derivations.

Kinds and implications: DEG implies Z and P (L1), Z and P each imply BEC
(L2); each kind is transitive (T) and DEG bridges into every kind through
L1. Z and P are never chained together.

Suffix rules (R1 / R2)::

    τ1 ≼ τ2, α ≼_Z γ  =>  τ1 α 1^p ≼_Z τ2 γ 1^p
    τ1 ≼ τ2, α ≼_P γ  =>  τ1 α 0^p ≼_P τ2 γ 0^p

Insertion rules (R6 / R7)::

    0^p α 1^r ≼_Z 1^q γ 0^s  =>  0^p τ α 1^t 1^r ≼_Z 1^q τ γ 1^t 0^s
    0^p α 1^r ≼_P 1^q γ 0^s  =>  0^p τ α 0^t 1^r ≼_P 1^q τ γ 0^t 0^s

Generators are the BEC-premise provers of :mod:`polarpo.orders.bounds`
(criterion shapes thm3 / prop10 / prop9 for Z, thm4 / thm5 for P), the
staircase checks thm1 / thm2 and the counting criterion cor1.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from polarpo.exceptions import BudgetExceededError, UsageError
from polarpo.models.config import EngineSettings
from polarpo.models.relations import Kind, KindMask, Relation, Rule
from polarpo.models.verdicts import Direction
from polarpo.orders.base import BaseOrder
from polarpo.orders.bec import BecOrder
from polarpo.orders.bounds import BmscBounds
from polarpo.orders.degradation import DegradationOrder, predecessors, successors
from polarpo.paths import PathLike, code_to_str, run_prefix, run_suffix, str_to_code
from polarpo.podb import PoDb, _certify_chunk, _chunks, _criterion_candidates
from polarpo.poly import chebyshev_grid, z_map
from polarpo.utils.budget import Budget

logger = logging.getLogger(__name__)

DEFAULT_RULES: FrozenSet[Rule] = frozenset(
    r for r in Rule if r not in (Rule.RULE3, Rule.BEC, Rule.EQUAL)
)

Z_SHAPES = (Rule.THM3, Rule.PROP10, Rule.THM1)
P_SHAPES = (Rule.THM4, Rule.THM5, Rule.THM2)
CRITERION_Z = (Rule.THM3, Rule.PROP10, Rule.PROP9)
CRITERION_P = (Rule.THM4, Rule.THM5)

_GRID = chebyshev_grid()


def _as_kind(kind: Union[Kind, str]) -> Kind:
    return kind if isinstance(kind, Kind) else Kind(kind.upper())


# Rule shapes and forward applications


def criterion_premises(rule: Rule, a: str, g: str) -> List[Tuple[str, str]]:
    """
    BEC premises (worse, better) under which ``rule`` concludes ``a ≼ g``.

    Empty when the pair does not have the rule's shape.
    """
    n = len(a)
    if rule is Rule.THM3:
        return [(a[:-1], g[1:])] if n and a.endswith("1") and g.startswith("1") else []
    if rule is Rule.PROP10:
        return [(a, g[1:] + "1")] if n and g.startswith("1") else []
    if rule is Rule.PROP9:
        return [("1" + a, g + "1")]
    if rule is Rule.THM4:
        out = [("1" + a, g + "0")]
        if n and a.endswith("0") and g.startswith("1"):
            out.insert(0, (a[:-1], g[1:]))
        return out
    if rule is Rule.THM5:
        if "1" not in g:
            return []
        q = run_prefix(g, "0")
        return [(a, "0" * (q + 1) + g[q + 1 :])]
    if rule in (Rule.THM1, Rule.THM2):
        m = run_prefix(a, "0")
        p = run_prefix(g, "1")
        if a != "0" * m + "1" * (n - m) or g != "1" * p + "0" * (n - p) or p < 1:
            return []
        if rule is Rule.THM1:
            if n - m < 1:
                return []
            return [("0" * m + "1" * (n - m - 1), "1" * (p - 1) + "0" * (n - p))]
        return [("0" * m + "1" * (n - m), "1" * (p - 1) + "0" * (n - p + 1))]
    return []


def rule_r1(tau1: str, tau2: str, alpha: str, gamma: str, p: int) -> Tuple[str, str]:
    return tau1 + alpha + "1" * p, tau2 + gamma + "1" * p


def rule_r2(tau1: str, tau2: str, alpha: str, gamma: str, p: int) -> Tuple[str, str]:
    return tau1 + alpha + "0" * p, tau2 + gamma + "0" * p


def _insert(worse: str, better: str, p: int, q: int, r: int, s: int, tau: str, t: int, bit: str) -> Tuple[str, str]:
    a = len(worse)
    if worse[:p] != "0" * p or (r and worse[a - r :] != "1" * r):
        raise ValueError(f"{worse} is not 0^{p} α 1^{r}")
    if better[:q] != "1" * q or (s and better[a - s :] != "0" * s):
        raise ValueError(f"{better} is not 1^{q} γ 0^{s}")
    alpha, gamma = worse[p : a - r], better[q : a - s]
    return (
        "0" * p + tau + alpha + bit * t + "1" * r,
        "1" * q + tau + gamma + bit * t + "0" * s,
    )


def rule_r6(worse: str, better: str, p: int, q: int, r: int, s: int, tau: str, t: int) -> Tuple[str, str]:
    """
    Insertion rule for Z: ``0^p α 1^r ≼_Z 1^q γ 0^s`` gives ``0^p τ α 1^t 1^r ≼_Z 1^q τ γ 1^t 0^s``.

    Example:
        >>> rule_r6("0110001", "1001110", 1, 1, 1, 1, "01", 2)
        ('00111000111', '10100111110')
    """
    return _insert(worse, better, p, q, r, s, tau, t, "1")


def rule_r7(worse: str, better: str, p: int, q: int, r: int, s: int, tau: str, t: int) -> Tuple[str, str]:
    """Insertion rule for P: the inserted run after α and γ is ``0^t``."""
    return _insert(worse, better, p, q, r, s, tau, t, "0")


def decompose_suffix(a: str, g: str, bit: str) -> Iterator[Tuple[str, str, str, str, int]]:
    """
    Ways to read ``(a, g)`` as ``(τ1 α bit^p, τ2 γ bit^p)`` with a shorter premise.

    Yields ``(τ1, τ2, α, γ, p)``, shortest premise first.
    """
    n = len(a)
    common = min(run_suffix(a, bit), run_suffix(g, bit))
    options = []
    for p in range(common + 1):
        for k in range(n - p):
            if p + k == 0:
                continue
            options.append((n - p - k, p, k))
    for length, p, k in sorted(options):
        yield a[:k], g[:k], a[k : n - p], g[k : n - p], p


def decompose_insert(a: str, g: str, bit: str) -> Iterator[Tuple[str, str, Dict[str, object]]]:
    """
    Premises ``(worse, better)`` from which the insertion rule with run ``bit`` yields ``(a, g)``.

    Yields ``(worse, better, params)`` with distinct premises, shortest first.
    """
    n = len(a)
    seen: Set[Tuple[str, str]] = set()
    found = []
    for p in range(run_prefix(a, "0") + 1):
        for q in range(run_prefix(g, "1") + 1):
            for k in range(0, n - max(p, q) + 1):
                tau = a[p : p + k]
                if g[q : q + k] != tau:
                    continue
                a_rest = a[:p] + a[p + k :]
                g_rest = g[:q] + g[q + k :]
                for t in range(0, n - k + 1):
                    if k + t == 0 or n - k - t < 1:
                        continue
                    length = n - k - t
                    for r in range(0, run_suffix(a_rest, "1") + 1):
                        block = a_rest[len(a_rest) - r - t : len(a_rest) - r]
                        if len(block) != t or block != bit * t or p > length - r:
                            continue
                        worse = a_rest[: len(a_rest) - r - t] + "1" * r
                        for s in range(0, run_suffix(g_rest, "0") + 1):
                            gblock = g_rest[len(g_rest) - s - t : len(g_rest) - s]
                            if len(gblock) != t or gblock != bit * t or q > length - s:
                                continue
                            better = g_rest[: len(g_rest) - s - t] + "0" * s
                            if (worse, better) in seen or worse == better:
                                continue
                            seen.add((worse, better))
                            found.append(
                                (length, worse, better, {"p": p, "q": q, "r": r, "s": s, "tau": tau, "t": t})
                            )
    for length, worse, better, params in sorted(found, key=lambda f: (f[0], f[1], f[2])):
        yield worse, better, params


def decompose_rule3(a: str, g: str) -> Iterator[Tuple[str, str, str, str, int]]:
    """Ways to read ``(a, g)`` as ``(ατη1^m, γτη0^m)``; yields ``(α, γ, τ, η, m)``."""
    n = len(a)
    for m in range(1, min(run_suffix(a, "1"), run_suffix(g, "0")) + 1):
        head_a, head_g = a[: n - m], g[: n - m]
        for a_len in range(1, n - m + 1):
            tail = head_a[a_len:]
            if head_g[a_len:] != tail:
                continue
            for split in range(len(tail) + 1):
                yield head_a[:a_len], head_g[:a_len], tail[:split], tail[split:], m


# Worker functions


def _p_candidates(n: int, skip: PoDb) -> List[Tuple[int, int]]:
    """Pairs surviving the float prefilter of either P strategy."""
    size = 1 << n
    paths = [code_to_str(c, n) for c in range(size)]
    tol = (1 << (n + 3)) * np.finfo(float).eps
    s1_left = np.stack([z_map("1" + p, _GRID) for p in paths])
    s1_right = np.stack([z_map(p + "0", _GRID) for p in paths])
    s2_left = np.stack([z_map(p, _GRID) for p in paths])
    shifted = []
    for p in paths:
        q = run_prefix(p, "0")
        shifted.append(z_map("0" * (q + 1) + p[q + 1 :], _GRID) if "1" in p else np.full(len(_GRID), np.inf))
    s2_right = np.stack(shifted)
    out = []
    for w in range(size):
        ok1 = (s1_left[w][None, :] - s1_right).min(axis=1) >= -tol
        ok2 = (s2_left[w][None, :] - s2_right).min(axis=1) >= -tol
        for b in np.nonzero(ok1 | ok2)[0].tolist():
            if b != w and not skip.has(w, b, KindMask.P):
                out.append((w, b))
    return out


def _certify_p_chunk(args: Tuple[int, List[Tuple[int, int]]]) -> List[Tuple[int, int, str]]:
    n, chunk = args
    bounds = BmscBounds(EngineSettings(workers=1))
    out = []
    for w, b in chunk:
        result = bounds.prove_P(code_to_str(w, n), code_to_str(b, n))
        if result.proven:
            out.append((w, b, result.rule))
    return out


class RuleEngine(BaseOrder):
    """Saturates relation stores and derives single pairs with replayable proofs."""

    def __init__(
        self,
        settings: Optional[EngineSettings] = None,
        deg: Optional[DegradationOrder] = None,
        bec: Optional[BecOrder] = None,
        bounds: Optional[BmscBounds] = None,
    ) -> None:
        super().__init__(settings)
        self.deg = deg or DegradationOrder(self.settings)
        self.bec = bec or BecOrder(self.settings)
        self.bounds = bounds or BmscBounds(self.settings, bec=self.bec)
        self._stores: Dict[int, PoDb] = {}
        self._seeds: Dict[Tuple[Kind, str, str], Relation] = {}
        self._memo: Dict[tuple, Optional[Relation]] = {}

    @property
    def stores(self) -> Dict[int, PoDb]:
        """Per-length relation stores of the last saturation."""
        return self._stores

    # leaves

    def _deg_leaf(self, a: str, g: str) -> Relation:
        if a == g:
            return Relation(kind=Kind.DEG, worse=a, better=g, rule=Rule.EQUAL)
        trace = self.deg.trace(a, g)
        return Relation(
            kind=Kind.DEG, worse=a, better=g, rule=Rule.DEG, certificate="bfs: " + " -> ".join(trace)
        )

    def _bec_leaf(self, a: str, g: str) -> Optional[Relation]:
        """BEC relation a ≼_BEC g with its certificate, or None."""
        if a != g and len(a) <= 16:
            diff = z_map(a, _GRID) - z_map(g, _GRID)
            if diff.min() < -((1 << (len(a) + 3)) * np.finfo(float).eps):
                return None
        verdict = self.bec.bec_leq(a, g)
        if verdict.relation not in (Direction.LEQ, Direction.EQUAL):
            return None
        return Relation(
            kind=Kind.BEC, worse=a, better=g, rule=Rule.BEC, certificate=verdict.certificate.value
        )

    # targeted derivation

    def derive_pair(
        self,
        alpha: PathLike,
        gamma: PathLike,
        kind: Union[Kind, str],
        rules: Optional[Iterable[Rule]] = None,
        max_depth: int = 3,
    ) -> Optional[Relation]:
        """
        Search for a derivation of ``α ≼_kind γ``.

        Tries degradation, the shaped direct rules, the generic criterion,
        then the suffix and insertion rules (shortest premise first) and
        finally one degradation step on either side.

        Args:
            alpha: Worse path
            gamma: Better path
            kind: DEG, Z, P or BEC
            rules: Restrict the final step to these rules; premises may use
                every default rule
            max_depth: Nesting limit for decomposition and transitivity steps

        Returns:
            The derivation, or None when undecided

        Raises:
            LengthMismatchError: If the paths differ in length

        Example:
            >>> RuleEngine().derive_pair("110001", "101101", "Z").rule
            <Rule.THM3: 'thm3'>
        """
        a, g = self._pair(alpha, gamma)
        kind = _as_kind(kind)
        if rules is not None:
            top = frozenset(rules)
        else:
            top = DEFAULT_RULES | {Rule.BEC} if kind is Kind.BEC else DEFAULT_RULES
        return self._derive(a, g, kind, top, max_depth, True)

    def _derive(
        self, a: str, g: str, kind: Kind, rules: FrozenSet[Rule], depth: int, allow_trans: bool
    ) -> Optional[Relation]:
        key = (a, g, kind, rules, depth, allow_trans)
        if key in self._memo:
            return self._memo[key]
        self._memo[key] = None
        result = self._search(a, g, kind, rules, depth, allow_trans)
        self._memo[key] = result
        return result

    def _search(
        self, a: str, g: str, kind: Kind, rules: FrozenSet[Rule], depth: int, allow_trans: bool
    ) -> Optional[Relation]:
        if a == g:
            return Relation(kind=kind, worse=a, better=g, rule=Rule.EQUAL)

        seed = self._seeds.get((kind, a, g))
        if seed is not None:
            return seed

        if Rule.DEG in rules and self.deg.leq(a, g):
            leaf = self._deg_leaf(a, g)
            if kind is Kind.DEG:
                return leaf
            return Relation(kind=kind, worse=a, better=g, rule=Rule.L1, premises=[leaf])

        if kind is Kind.DEG:
            if Rule.RULE3 in rules and depth > 0:
                for alpha, gamma, tau, eta, m in decompose_rule3(a, g):
                    if alpha == gamma or not self.deg.leq(alpha, gamma):
                        continue
                    inner = self._derive(
                        alpha + tau + "1" * m, gamma + tau + "0" * m, Kind.DEG,
                        frozenset({Rule.DEG, Rule.RULE3}), depth - 1, False,
                    )
                    if inner is not None:
                        return Relation(
                            kind=Kind.DEG, worse=a, better=g, rule=Rule.RULE3,
                            premises=[self._deg_leaf(alpha, gamma), inner],
                            note=f"tau={tau or 'ε'}, eta={eta or 'ε'}, m={m}",
                        )
            return None

        if kind is Kind.BEC:
            if Rule.BEC in rules:
                return self._bec_leaf(a, g)
            if Rule.L2 in rules:
                for via in (Kind.Z, Kind.P):
                    inner = self._derive(a, g, via, DEFAULT_RULES, depth, allow_trans)
                    if inner is not None:
                        return Relation(kind=Kind.BEC, worse=a, better=g, rule=Rule.L2, premises=[inner])
            return None

        shaped = Z_SHAPES if kind is Kind.Z else P_SHAPES
        for rule in shaped:
            if rule not in rules:
                continue
            for premise in criterion_premises(rule, a, g)[:1]:
                leaf = self._bec_leaf(*premise)
                if leaf is not None:
                    return Relation(kind=kind, worse=a, better=g, rule=rule, premises=[leaf])

        if Rule.COR1 in rules and self.bounds.corollary_check(g, a, kind.value):
            return Relation(
                kind=kind, worse=a, better=g, rule=Rule.COR1, certificate="counting",
                note=f"mode={self.settings.corollary_mode}",
            )

        generic = Rule.PROP9 if kind is Kind.Z else Rule.THM4
        if generic in rules:
            premise = criterion_premises(generic, a, g)[-1]
            leaf = self._bec_leaf(*premise)
            if leaf is not None:
                return Relation(kind=kind, worse=a, better=g, rule=generic, premises=[leaf])

        if depth > 0:
            found = self._decompose(a, g, kind, rules, depth)
            if found is not None:
                return found

        if allow_trans and depth > 0 and Rule.TRANS in rules:
            n = len(a)
            for b in sorted(successors(str_to_code(a), n)):
                mid = code_to_str(b, n)
                inner = self._derive(mid, g, kind, DEFAULT_RULES, depth - 1, False)
                if inner is not None:
                    return Relation(
                        kind=kind, worse=a, better=g, rule=Rule.TRANS,
                        premises=[self._deg_leaf(a, mid), inner],
                    )
            for b in sorted(predecessors(str_to_code(g), n)):
                mid = code_to_str(b, n)
                inner = self._derive(a, mid, kind, DEFAULT_RULES, depth - 1, False)
                if inner is not None:
                    return Relation(
                        kind=kind, worse=a, better=g, rule=Rule.TRANS,
                        premises=[inner, self._deg_leaf(mid, g)],
                    )
        return None

    def _decompose(
        self, a: str, g: str, kind: Kind, rules: FrozenSet[Rule], depth: int
    ) -> Optional[Relation]:
        suffix_rule, insert_rule = (Rule.R1, Rule.R6) if kind is Kind.Z else (Rule.R2, Rule.R7)
        bit = "1" if kind is Kind.Z else "0"
        candidates: List[Tuple[int, int, tuple]] = []
        if suffix_rule in rules:
            for tau1, tau2, alpha, gamma, p in decompose_suffix(a, g, bit):
                if tau1 == tau2 or self.deg.leq(tau1, tau2):
                    candidates.append((len(alpha), 0, (suffix_rule, tau1, tau2, alpha, gamma, p)))
        if insert_rule in rules:
            for worse, better, params in decompose_insert(a, g, bit):
                candidates.append((len(worse), 1, (insert_rule, worse, better, params)))
        candidates.sort(key=lambda c: (c[0], c[1]))

        for _length, _order, spec in candidates:
            if spec[0] is suffix_rule:
                _, tau1, tau2, alpha, gamma, p = spec
                if alpha == gamma:
                    continue
                inner = self._derive(alpha, gamma, kind, DEFAULT_RULES, depth - 1, False)
                if inner is None:
                    continue
                return Relation(
                    kind=kind, worse=a, better=g, rule=suffix_rule,
                    premises=[self._deg_leaf(tau1, tau2), inner], note=f"p={p}",
                )
            _, worse, better, params = spec
            inner = self._derive(worse, better, kind, DEFAULT_RULES, depth - 1, False)
            if inner is None:
                continue
            note = ", ".join(f"{k}={v if v != '' else 'ε'}" for k, v in params.items())
            return Relation(kind=kind, worse=a, better=g, rule=insert_rule, premises=[inner], note=note)
        return None

    def clear_cache(self) -> None:
        self._memo.clear()

    # saturation

    def saturate(
        self,
        n: int,
        rules: Optional[Iterable[Rule]] = None,
        seeds: Sequence[Relation] = (),
        tau_budget: Optional[int] = None,
    ) -> PoDb:
        """
        Fixed-point closure of every enabled rule for lengths 1..n.

        Each length is closed before the next one starts, so the suffix and
        insertion rules only read finished stores.

        Args:
            n: Longest path length
            rules: Enabled rules (defaults exclude the third degradation rule
                and the direct BEC generator)
            seeds: Extra relations taken as given, e.g. derived elsewhere
            tau_budget: Longest τ for the insertion rules

        Returns:
            The store for length n; all lengths are kept in :attr:`stores`.
            A budget stop returns a store flagged incomplete.

        Raises:
            UsageError: If n is outside 1..max_length
        """
        if n < 1 or n > self.settings.max_length:
            raise UsageError(
                f"saturation length must be between 1 and {self.settings.max_length}",
                details={"n": n},
            )
        enabled = frozenset(rules) if rules is not None else DEFAULT_RULES
        tau_budget = self.settings.tau_budget if tau_budget is None else tau_budget
        budget = Budget(self.settings.budget_seconds, self.settings.budget_pairs)

        self._stores = {}
        self._seeds = {}
        for rel in seeds:
            self._seeds[(rel.kind, rel.worse, rel.better)] = rel
        self._memo.clear()

        for length in range(1, n + 1):
            try:
                self._stores[length] = self._saturate_length(length, enabled, tau_budget, budget)
            except BudgetExceededError as e:
                logger.warning("saturation stopped at length %d: %s", length, e.message)
                partial = self._stores.get(length) or PoDb(length)
                partial.complete = False
                partial.config["budget"] = {"elapsed": e.elapsed, "pairs_done": e.pairs_done}
                self._stores[length] = partial
                return partial
            logger.info("saturated length %d: %d pairs", length, len(self._stores[length]))
        return self._stores[n]

    def _saturate_length(
        self, n: int, rules: FrozenSet[Rule], tau_budget: int, budget: Budget
    ) -> PoDb:
        db = self.deg.base_db(n)
        self._stores[n] = db
        db.config["rules"] = sorted(r.value for r in rules)
        if Rule.RULE3 in rules and n > 2:
            db.merge(self.deg.deg_closure_rule3(self._stores, n))
            db.transitive_close(KindMask.DEG)
            db.rule3 = True

        for (kind, w, b), rel in sorted(self._seeds.items(), key=lambda s: (s[0][0].value, s[0][1], s[0][2])):
            if len(w) == n and w != b:
                db.add(str_to_code(w), str_to_code(b), kind.mask, rel.rule)

        self._lattice(db, rules)
        budget.check(len(db), what=f"saturation at n={n}")
        self._generators(db, rules)
        budget.check(len(db), what=f"saturation at n={n}")
        self._suffix_rules(db, rules)
        budget.check(len(db), what=f"saturation at n={n}")
        self._insertion_rules(db, rules, tau_budget)
        budget.check(len(db), what=f"saturation at n={n}")
        self._lattice(db, rules)
        return db

    def _lattice(self, db: PoDb, rules: FrozenSet[Rule]) -> None:
        """L1, transitivity per kind, then L2 and BEC transitivity."""
        n = db.n
        if Rule.L1 in rules:
            for w, b in list(db.pairs(KindMask.DEG)):
                for bit in (KindMask.Z, KindMask.P):
                    if db.add(w, b, bit, Rule.L1):
                        db.set_premises(w, b, bit, [(n, w, b, "DEG")])
        if Rule.TRANS in rules:
            db.transitive_close(KindMask.Z)
            db.transitive_close(KindMask.P)
        if Rule.L2 in rules:
            for bit in (KindMask.Z, KindMask.P):
                for w, b in list(db.pairs(bit)):
                    if db.add(w, b, KindMask.BEC, Rule.L2):
                        db.set_premises(w, b, KindMask.BEC, [(n, w, b, bit.name)])
        if Rule.TRANS in rules:
            db.transitive_close(KindMask.BEC)

    def _run_chunks(self, worker, n: int, pairs: List[Tuple[int, int]]) -> List[Tuple[int, int, str]]:
        jobs = [(n, chunk) for chunk in _chunks(pairs, 64)]
        out: List[Tuple[int, int, str]] = []
        if self.settings.workers <= 1 or len(jobs) <= 1:
            for job in jobs:
                out.extend(worker(job))
            return out
        with ProcessPoolExecutor(max_workers=self.settings.workers) as pool:
            for results in pool.map(worker, jobs):
                out.extend(results)
        return out

    def _generators(self, db: PoDb, rules: FrozenSet[Rule]) -> None:
        n = db.n
        if any(r in rules for r in CRITERION_Z):
            candidates = _criterion_candidates(n, db, full=False)
            candidates = [(w, b) for w, b in candidates if not db.has(w, b, KindMask.Z)]
            for w, b, rule in self._run_chunks(_certify_chunk, n, candidates):
                shape = Rule(rule)
                if shape in rules:
                    db.add(w, b, KindMask.Z, shape)
                elif Rule.PROP9 in rules:
                    db.add(w, b, KindMask.Z, Rule.PROP9)
        if any(r in rules for r in CRITERION_P):
            for w, b, rule in self._run_chunks(_certify_p_chunk, n, _p_candidates(n, db)):
                if Rule(rule) in rules:
                    db.add(w, b, KindMask.P, Rule(rule))

        for rule, bit in ((Rule.THM1, KindMask.Z), (Rule.THM2, KindMask.P)):
            if rule not in rules:
                continue
            check = self.bounds.theorem1_check if rule is Rule.THM1 else self.bounds.theorem2_check
            for m, p in product(range(n + 1), range(1, n + 1)):
                ones, q = n - m, n - p
                if rule is Rule.THM1 and ones < 1:
                    continue
                a, g = "0" * m + "1" * ones, "1" * p + "0" * q
                if a != g and check(m, ones, p, q):
                    db.add(str_to_code(a), str_to_code(g), bit, rule)

        if Rule.COR1 in rules and n >= 2:
            paths = [code_to_str(c, n) for c in range(1 << n)]
            for kind, bit in ((Kind.Z, KindMask.Z), (Kind.P, KindMask.P)):
                for better in paths:
                    if not self.bounds.corollary_applies(n, better.count("0"), kind.value):
                        continue
                    for worse in paths:
                        if worse != better and self.bounds.corollary_check(better, worse, kind.value):
                            db.add(str_to_code(worse), str_to_code(better), bit, Rule.COR1)

    def _suffix_rules(self, db: PoDb, rules: FrozenSet[Rule]) -> None:
        n = db.n
        for rule, kind, bit in ((Rule.R1, KindMask.Z, "1"), (Rule.R2, KindMask.P, "0")):
            if rule not in rules:
                continue
            for a_len in range(1, n):
                store = self._stores.get(a_len)
                if store is None:
                    continue
                for p in range(0, n - a_len + 1):
                    k = n - a_len - p
                    taus = self._tau_pairs(k)
                    for w, b in list(store.pairs(kind)):
                        alpha, gamma = code_to_str(w, a_len), code_to_str(b, a_len)
                        for t1, t2 in taus:
                            worse = str_to_code(t1 + alpha + bit * p)
                            better = str_to_code(t2 + gamma + bit * p)
                            if db.add(worse, better, kind, rule):
                                db.set_premises(
                                    worse, better, kind,
                                    [(k, str_to_code(t1), str_to_code(t2), "DEG"), (a_len, w, b, kind.name)],
                                )

    def _tau_pairs(self, k: int) -> List[Tuple[str, str]]:
        """All (τ1, τ2) with τ1 ≼ τ2 of length k, reflexive pairs included."""
        out = [(code_to_str(c, k), code_to_str(c, k)) for c in range(1 << k)]
        if k:
            store = self._stores.get(k)
            pairs = store.pairs(KindMask.DEG) if store is not None else self.deg.base_db(k).pairs(KindMask.DEG)
            out.extend((code_to_str(w, k), code_to_str(b, k)) for w, b in pairs)
        return out

    def _insertion_rules(self, db: PoDb, rules: FrozenSet[Rule], tau_budget: int) -> None:
        n = db.n
        for rule, kind, bit in ((Rule.R6, KindMask.Z, "1"), (Rule.R7, KindMask.P, "0")):
            if rule not in rules:
                continue
            for a_len in range(1, n):
                store = self._stores.get(a_len)
                if store is None:
                    continue
                gap = n - a_len
                for w, b in list(store.pairs(kind)):
                    worse, better = code_to_str(w, a_len), code_to_str(b, a_len)
                    for p, r in self._ends(worse, "0", "1"):
                        for q, s in self._ends(better, "1", "0"):
                            for k in range(0, min(tau_budget, gap) + 1):
                                t = gap - k
                                for c in range(1 << k):
                                    tau = code_to_str(c, k)
                                    cw, cb = _insert(worse, better, p, q, r, s, tau, t, bit)
                                    iw, ib = str_to_code(cw), str_to_code(cb)
                                    if iw != ib and db.add(iw, ib, kind, rule):
                                        db.set_premises(iw, ib, kind, [(a_len, w, b, kind.name)])

    @staticmethod
    def _ends(s: str, head: str, tail: str) -> Iterator[Tuple[int, int]]:
        """(p, r) with s = head^p x tail^r."""
        for p in range(run_prefix(s, head) + 1):
            for r in range(run_suffix(s, tail) + 1):
                if p + r <= len(s):
                    yield p, r

    # provenance

    def explain(self, kind: Union[Kind, str], worse: PathLike, better: PathLike) -> Relation:
        """
        Rebuild the derivation of a stored pair from the last saturation.

        Raises:
            UsageError: If the pair is not stored for that kind
        """
        a, g = self._pair(worse, better)
        return self._explain(_as_kind(kind), a, g, {})

    def _explain(self, kind: Kind, a: str, g: str, seen: Dict[tuple, Relation]) -> Relation:
        key = (kind, a, g)
        if key in seen:
            return seen[key]
        if a == g:
            return Relation(kind=kind, worse=a, better=g, rule=Rule.EQUAL)
        store = self._stores.get(len(a))
        w, b = str_to_code(a), str_to_code(g)
        if store is None or not store.has(w, b, kind.mask):
            raise UsageError(
                f"{a} {kind.symbol} {g} is not in the saturated store",
                details={"kind": kind.value, "worse": a, "better": g},
            )
        rule = store.rule(w, b, kind.mask) or Rule.DEG
        refs = store.premises(w, b, kind.mask)

        if (kind, a, g) in self._seeds and rule is self._seeds[(kind, a, g)].rule and not refs:
            rel = self._seeds[(kind, a, g)]
        elif rule is Rule.DEG:
            rel = self._deg_leaf(a, g)
        elif refs:
            premises = [
                self._explain(Kind(ref_kind), code_to_str(rw, length), code_to_str(rb, length), seen)
                for length, rw, rb, ref_kind in refs
            ]
            note = f"p={len(a) - len(premises[0].worse) - len(premises[1].worse)}" if rule in (Rule.R1, Rule.R2) else None
            rel = Relation(kind=kind, worse=a, better=g, rule=rule, premises=premises, note=note)
        elif rule is Rule.COR1:
            rel = Relation(kind=kind, worse=a, better=g, rule=rule, certificate="counting")
        else:
            premises = []
            for premise in criterion_premises(rule, a, g):
                leaf = self._bec_leaf(*premise)
                if leaf is not None:
                    premises = [leaf]
                    break
            rel = Relation(kind=kind, worse=a, better=g, rule=rule, premises=premises)
        seen[key] = rel
        return rel

    def replay(self, relation: Relation) -> bool:
        """
        Re-verify a derivation bottom-up.

        Leaves are re-checked exactly (BFS reachability, BEC polynomial
        dominance, the counting criterion); inner nodes must match their
        rule's shape.
        """
        r = relation
        a, g = r.worse, r.better
        ps = r.premises
        if not all(self.replay(p) for p in ps):
            return False

        if r.rule is Rule.EQUAL:
            return a == g
        if r.rule is Rule.DEG:
            return r.kind is Kind.DEG and self.deg.leq(a, g)
        if r.rule is Rule.BEC:
            return r.kind is Kind.BEC and self.bec.leq(a, g)
        if r.rule is Rule.COR1:
            return r.kind in (Kind.Z, Kind.P) and self.bounds.corollary_check(g, a, r.kind.value)
        if r.rule is Rule.L1:
            return len(ps) == 1 and ps[0].kind is Kind.DEG and (ps[0].worse, ps[0].better) == (a, g)
        if r.rule is Rule.L2:
            return (
                r.kind is Kind.BEC and len(ps) == 1 and ps[0].kind in (Kind.Z, Kind.P)
                and (ps[0].worse, ps[0].better) == (a, g)
            )
        if r.rule is Rule.TRANS:
            if len(ps) != 2 or ps[0].better != ps[1].worse or (ps[0].worse, ps[1].better) != (a, g):
                return False
            return all(p.kind in (r.kind, Kind.DEG) for p in ps)
        if r.rule in CRITERION_Z + CRITERION_P + (Rule.THM1, Rule.THM2):
            if len(ps) != 1 or ps[0].kind is not Kind.BEC:
                return False
            expected = Kind.Z if r.rule in CRITERION_Z + (Rule.THM1,) else Kind.P
            return r.kind is expected and (ps[0].worse, ps[0].better) in criterion_premises(r.rule, a, g)
        if r.rule in (Rule.R1, Rule.R2):
            if len(ps) != 2 or ps[0].kind is not Kind.DEG:
                return False
            bit = "1" if r.rule is Rule.R1 else "0"
            for tau1, tau2, alpha, gamma, _p in decompose_suffix(a, g, bit):
                if (tau1, tau2, alpha, gamma) == (ps[0].worse, ps[0].better, ps[1].worse, ps[1].better):
                    return ps[1].kind is r.kind
            return False
        if r.rule in (Rule.R6, Rule.R7):
            if len(ps) != 1 or ps[0].kind is not r.kind:
                return False
            bit = "1" if r.rule is Rule.R6 else "0"
            return any(
                (w, b) == (ps[0].worse, ps[0].better) for w, b, _params in decompose_insert(a, g, bit)
            )
        if r.rule is Rule.RULE3:
            if len(ps) != 2:
                return False
            for alpha, gamma, tau, _eta, m in decompose_rule3(a, g):
                if (alpha, gamma) == (ps[0].worse, ps[0].better) and (
                    alpha + tau + "1" * m, gamma + tau + "0" * m
                ) == (ps[1].worse, ps[1].better):
                    return True
            return False
        return False
