"""
Pairwise relation database over all paths of one length.

Entries are keyed by MSB-first path codes ``(worse, better)`` and hold a
kind mask plus, per kind, the rule that produced the pair. The channel-index
convention only matters when translating indices (``contains_pu``).
"""

import json
import logging
import math
import struct
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path as FsPath
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from pydantic import ValidationError

from polarpo.exceptions import (
    BudgetExceededError,
    IncompleteDatabaseError,
    InconsistentOrderError,
    SinkError,
    UnknownDatabaseFormatError,
    UsageError,
)
from polarpo.models.config import EngineSettings
from polarpo.models.database import DbDocument, DbHeader, DbStats, PairRecord
from polarpo.models.paths import BitOrder
from polarpo.models.relations import Kind, KindMask, Rule
from polarpo.paths import code_to_str, index_to_path
from polarpo.poly import chebyshev_grid, z_map
from polarpo.utils.budget import Budget

logger = logging.getLogger(__name__)

MAGIC = b"POLO"
FORMAT_VERSION = 2
READABLE_VERSIONS = (1, 2)
HEADER = struct.Struct("<4sHBBQQ")
TRIPLE = struct.Struct("<IIB")
TRAILER_LEN = struct.Struct("<I")

FLAG_COMPLETE = 1
FLAG_RULE3 = 2
FLAG_TRANSITIVE = 4

# |P_k| at n = 10 reported for the degradation rules.
PUBLISHED_DEG_COUNT_N10 = 328155

# Reference |P_k| by length; a build at a listed length checks its closure against it.
PUBLISHED_DEG_COUNTS: Dict[int, int] = {10: PUBLISHED_DEG_COUNT_N10}

# Pairs (better, worse) by channel index that only the Z criterion orders at n = 10.
PU_PAIRS: Tuple[Tuple[int, int], ...] = ((719, 250), (840, 372), (907, 466), (909, 690), (921, 482))

# (length, worse, better, kind) of a premise stored in some database
PremiseRef = Tuple[int, int, int, str]


def _kind_bits(mask: int) -> Iterator[KindMask]:
    for bit in (KindMask.DEG, KindMask.Z, KindMask.P, KindMask.BEC):
        if mask & bit:
            yield bit


class PoDb:
    """
    Sparse store of ordered path pairs for one length.

    Example:
        >>> db = PoDb(2)
        >>> db.add(0b01, 0b10, KindMask.DEG, Rule.DEG)
        True
        >>> db.has(0b01, 0b10, KindMask.DEG)
        True
    """

    def __init__(self, n: int, complete: bool = True, config: Optional[Dict[str, Any]] = None) -> None:
        self.n = n
        self.complete = complete
        self.rule3 = False
        self.transitive = False
        self.config: Dict[str, Any] = dict(config or {})
        self._kinds: Dict[Tuple[int, int], int] = {}
        self._rules: Dict[Tuple[int, int, int], Rule] = {}
        self._premises: Dict[Tuple[int, int, int], List[PremiseRef]] = {}

    # store

    def add(self, worse: int, better: int, kinds: int, rule: Optional[Rule] = None) -> bool:
        """
        Record ``worse ≼ better`` for every kind in ``kinds``.

        Returns:
            True if at least one kind was new for the pair

        Raises:
            ValueError: If worse == better
            InconsistentOrderError: If the reverse pair already holds one of the kinds
        """
        if worse == better:
            raise ValueError("a stored pair needs two distinct paths")
        reverse = self._kinds.get((better, worse), 0)
        if reverse & kinds:
            raise InconsistentOrderError(
                f"both directions derived for {code_to_str(worse, self.n)} and "
                f"{code_to_str(better, self.n)}",
                details={"kinds": int(reverse & kinds)},
            )
        key = (worse, better)
        old = self._kinds.get(key, 0)
        new = int(kinds) & ~old
        if not new:
            return False
        self._kinds[key] = old | new
        if rule is not None:
            for bit in _kind_bits(new):
                self._rules[(worse, better, int(bit))] = rule
        return True

    def set_premises(self, worse: int, better: int, kind: int, premises: Sequence[PremiseRef]) -> None:
        self._premises[(worse, better, int(kind))] = list(premises)

    def premises(self, worse: int, better: int, kind: int) -> List[PremiseRef]:
        return self._premises.get((worse, better, int(kind)), [])

    def has(self, worse: int, better: int, kind: int) -> bool:
        return bool(self._kinds.get((worse, better), 0) & kind)

    def kinds(self, worse: int, better: int) -> KindMask:
        return KindMask(self._kinds.get((worse, better), 0))

    def rule(self, worse: int, better: int, kind: int) -> Optional[Rule]:
        return self._rules.get((worse, better, int(kind)))

    def pairs(self, kind: Optional[int] = None) -> Iterator[Tuple[int, int]]:
        """Stored pairs in (worse, better) order, restricted to ``kind`` if given."""
        for key in sorted(self._kinds):
            if kind is None or self._kinds[key] & kind:
                yield key

    def count(self, kind: int) -> int:
        return sum(1 for mask in self._kinds.values() if mask & kind)

    def merge(self, other: "PoDb") -> int:
        """Add every entry of ``other``; returns the number of pairs that gained a kind."""
        added = 0
        for (w, b), mask in sorted(other._kinds.items()):
            for bit in _kind_bits(mask):
                if self.add(w, b, bit, other.rule(w, b, bit)):
                    added += 1
                    refs = other.premises(w, b, bit)
                    if refs:
                        self.set_premises(w, b, bit, refs)
        return added

    def transitive_close(self, kind: KindMask) -> int:
        """
        Close one kind under transitivity; returns the number of pairs added.

        Each added pair records the two pairs it was composed from, both
        present when it was inserted.
        """
        size = 1 << self.n
        succ = [0] * size
        for w, b in self.pairs(kind):
            succ[w] |= 1 << b
        added = 0
        for k in range(size):
            bk = succ[k]
            if not bk:
                continue
            bit = 1 << k
            for i in range(size):
                if not succ[i] & bit:
                    continue
                new = bk & ~succ[i] & ~(1 << i)
                succ[i] |= bk
                while new:
                    low = new & -new
                    j = low.bit_length() - 1
                    if self.add(i, j, kind, Rule.TRANS):
                        added += 1
                        self.set_premises(
                            i, j, kind,
                            [(self.n, i, k, kind.name), (self.n, k, j, kind.name)],
                        )
                    new ^= low
        return added

    @property
    def total_pairs(self) -> int:
        return math.comb(1 << self.n, 2)

    def __len__(self) -> int:
        return len(self._kinds)

    def __contains__(self, pair: object) -> bool:
        return pair in self._kinds

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PoDb):
            return NotImplemented
        return self.n == other.n and self._kinds == other._kinds and self._rules == other._rules

    def __repr__(self) -> str:
        return f"PoDb(n={self.n}, pairs={len(self)}, complete={self.complete})"

    # serialization

    @property
    def flags(self) -> int:
        return (
            (FLAG_COMPLETE if self.complete else 0)
            | (FLAG_RULE3 if self.rule3 else 0)
            | (FLAG_TRANSITIVE if self.transitive else 0)
        )

    def header(self) -> DbHeader:
        return DbHeader(
            n=self.n,
            complete=self.complete,
            bit_order=self.config.get("bit_order", BitOrder.MSB.value),
            total_pairs=self.total_pairs,
            config={**self.config, "rule3": self.rule3, "transitive": self.transitive},
        )

    def records(self) -> List[PairRecord]:
        out = []
        for w, b in self.pairs():
            mask = self._kinds[(w, b)]
            rules = {}
            for bit in _kind_bits(mask):
                rule = self.rule(w, b, bit)
                if rule is not None:
                    rules[bit.name] = rule.value
            out.append(
                PairRecord(
                    worse=w, better=b, kinds=[bit.name for bit in _kind_bits(mask)], rules=rules
                )
            )
        return out

    def to_document(self) -> DbDocument:
        return DbDocument(header=self.header(), pairs=self.records())

    @classmethod
    def from_document(cls, doc: DbDocument) -> "PoDb":
        db = cls(doc.header.n, complete=doc.header.complete, config=dict(doc.header.config))
        db.rule3 = bool(db.config.pop("rule3", False))
        db.transitive = bool(db.config.pop("transitive", False))
        for rec in doc.pairs:
            for name in rec.kinds:
                bit = KindMask[name]
                rule = rec.rules.get(name)
                db.add(rec.worse, rec.better, bit, Rule(rule) if rule else None)
        return db

    def to_binary(self) -> bytes:
        """
        Little-endian header, sorted (worse, better, mask) triples, then the
        build configuration as a length-prefixed UTF-8 JSON trailer.
        """
        pairs = list(self.pairs())
        chunks = [HEADER.pack(MAGIC, FORMAT_VERSION, self.n, self.flags, len(pairs), self.total_pairs)]
        chunks.extend(TRIPLE.pack(w, b, self._kinds[(w, b)]) for w, b in pairs)
        trailer = json.dumps(self.config, sort_keys=True).encode("utf-8")
        chunks.append(TRAILER_LEN.pack(len(trailer)))
        chunks.append(trailer)
        return b"".join(chunks)

    @classmethod
    def from_binary(cls, data: bytes) -> "PoDb":
        """
        Read version 2 files and the trailer-less version 1.

        Raises:
            UnknownDatabaseFormatError: If the magic, version or size is wrong
        """
        if len(data) < HEADER.size:
            raise UnknownDatabaseFormatError("binary database shorter than its header")
        magic, version, n, flags, count, _total = HEADER.unpack_from(data, 0)
        if magic != MAGIC or version not in READABLE_VERSIONS:
            raise UnknownDatabaseFormatError(
                "not a polarpo binary database", details={"magic": repr(magic), "version": version}
            )
        end = HEADER.size + count * TRIPLE.size
        config: Dict[str, Any] = {}
        if version >= 2:
            if len(data) < end + TRAILER_LEN.size:
                raise UnknownDatabaseFormatError(
                    "binary database truncated before its trailer",
                    details={"size": len(data), "pairs": count},
                )
            (length,) = TRAILER_LEN.unpack_from(data, end)
            size = end + TRAILER_LEN.size + length
            if len(data) == size:
                try:
                    config = json.loads(data[end + TRAILER_LEN.size :].decode("utf-8"))
                except (UnicodeDecodeError, json.JSONDecodeError) as e:
                    raise UnknownDatabaseFormatError(
                        "binary database trailer is not JSON", errors=[str(e)]
                    ) from e
                if not isinstance(config, dict):
                    raise UnknownDatabaseFormatError("binary database trailer is not a JSON object")
        else:
            size = end
        if len(data) != size:
            raise UnknownDatabaseFormatError(
                "binary database size does not match its pair count",
                details={"size": len(data), "pairs": count},
            )
        db = cls(n, complete=bool(flags & FLAG_COMPLETE), config=config)
        db.rule3 = bool(flags & FLAG_RULE3)
        db.transitive = bool(flags & FLAG_TRANSITIVE)
        for w, b, mask in TRIPLE.iter_unpack(data[HEADER.size : end]):
            db.add(w, b, mask)
        return db

    def to_dot(self, kind: Kind = Kind.Z) -> str:
        """Hasse diagram (transitive reduction) of one kind, nodes labelled by path."""
        graph = nx.DiGraph()
        graph.add_nodes_from(range(1 << self.n))
        graph.add_edges_from(self.pairs(kind.mask))
        reduced = nx.transitive_reduction(graph)
        lines = [f"digraph po_n{self.n}_{kind.value.lower()} {{", "  rankdir=BT;"]
        for node in sorted(reduced.nodes):
            lines.append(f'  "{code_to_str(node, self.n)}";')
        for w, b in sorted(reduced.edges):
            lines.append(f'  "{code_to_str(w, self.n)}" -> "{code_to_str(b, self.n)}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


# Index conventions


def index_code(index: int, n: int, order: BitOrder) -> int:
    """MSB-first path code of a channel index under ``order``."""
    return index_to_path(index, order, n).code


# Build pipeline


def _criterion_candidates(n: int, skip: PoDb, full: bool) -> List[Tuple[int, int]]:
    """
    Ordered pairs (worse, better) surviving the float prefilter of ``1·worse ≼_BEC better·1``.

    A pair is dropped only if the float difference is below minus the
    propagated rounding bound at some grid point, so no true pair is lost.
    """
    size = 1 << n
    grid = chebyshev_grid()
    paths = [code_to_str(c, n) for c in range(size)]
    left = np.stack([z_map("1" + p, grid) for p in paths])
    right = np.stack([z_map(p + "1", grid) for p in paths])
    tol = (1 << (n + 3)) * np.finfo(float).eps
    out = []
    for w in range(size):
        ok = np.nonzero((left[w][None, :] - right).min(axis=1) >= -tol)[0]
        for b in ok.tolist():
            if b == w:
                continue
            if not full and skip.has(w, b, KindMask.DEG):
                continue
            out.append((w, b))
    return out


def _certify_chunk(args: Tuple[int, List[Tuple[int, int]]]) -> List[Tuple[int, int, str]]:
    """Worker: exact criterion check for a chunk of candidate pairs."""
    from polarpo.orders.bounds import BmscBounds

    n, chunk = args
    bounds = BmscBounds(EngineSettings(workers=1))
    out = []
    for w, b in chunk:
        result = bounds.prove_Z(code_to_str(w, n), code_to_str(b, n))
        if result.proven:
            out.append((w, b, result.rule))
    return out


def _chunks(items: List[Tuple[int, int]], size: int) -> List[List[Tuple[int, int]]]:
    return [items[i : i + size] for i in range(0, len(items), size)]


def build(
    n: int,
    settings: Optional[EngineSettings] = None,
    rule3: Optional[bool] = None,
    transitive: bool = False,
    full_criterion: bool = False,
    chunk_size: int = 64,
) -> PoDb:
    """
    Build the degradation pairs P_k and the criterion-certified Z pairs.

    Pairs are prefiltered in float on a Chebyshev grid and certified exactly
    by ``prove_Z`` across a process pool; results are merged in job order.

    Args:
        n: Path length
        settings: Engine settings (workers, budgets)
        rule3: Saturate with the third degradation rule; None runs the base
            closure and, at a length listed in ``PUBLISHED_DEG_COUNTS``,
            retries with saturation when the count differs from the
            reference. The saturated closure is kept only if it matches;
            otherwise ``deg_config`` is ``none`` and
            ``deg_mismatch`` holds both counts
        transitive: Also close the Z pairs transitively
        full_criterion: Certify degradation pairs with the criterion as well
        chunk_size: Candidate pairs per worker job

    Returns:
        The database; ``complete`` is False when a budget stopped the build

    Raises:
        UsageError: If n is negative or above the configured maximum length
    """
    from polarpo.orders.degradation import DegradationOrder

    settings = settings or EngineSettings()
    if n < 0 or n > settings.max_length:
        raise UsageError(
            f"n must be between 0 and {settings.max_length}", details={"n": n}
        )
    budget = Budget(settings.budget_seconds, settings.budget_pairs)
    deg = DegradationOrder(settings)

    config: Dict[str, Any] = {"bit_order": settings.bit_order.value}
    base = deg.base_db(n)
    config["deg_base"] = base.count(KindMask.DEG)
    pk = base
    published = PUBLISHED_DEG_COUNTS.get(n)
    retry = rule3 is None and published is not None and config["deg_base"] != published
    if rule3 or retry:
        if retry:
            logger.info(
                "base closure gives %d degradation pairs, retrying with the third rule",
                config["deg_base"],
            )
        saturated = deg.family(n, rule3=True)[n]
        config["deg_rule3"] = saturated.count(KindMask.DEG)
        # a retry that still misses keeps the base closure
        if rule3 or config["deg_rule3"] == published:
            pk = saturated
    config["deg_config"] = "base" if pk is base else "rule3"
    if published is not None and pk.count(KindMask.DEG) != published:
        config["deg_config"] = "none"
        config["deg_mismatch"] = {
            "published": published,
            "base": config["deg_base"],
            "rule3": config.get("deg_rule3"),
        }
        logger.warning(
            "no degradation configuration reproduces %d pairs at n=%d (base %d, rule3 %s)",
            published,
            n,
            config["deg_base"],
            config.get("deg_rule3"),
        )

    db = PoDb(n, config=config)
    db.rule3 = pk is not base
    for w, b in pk.pairs(KindMask.DEG):
        db.add(w, b, KindMask.DEG, pk.rule(w, b, KindMask.DEG) or Rule.DEG)
        db.add(w, b, KindMask.Z | KindMask.P, Rule.L1)
        db.add(w, b, KindMask.BEC, Rule.L2)
    logger.info("n=%d: %d degradation pairs", n, db.count(KindMask.DEG))

    if n == 0:
        return db

    candidates = _criterion_candidates(n, db, full_criterion)
    logger.info("n=%d: %d criterion candidates after the float filter", n, len(candidates))
    jobs = [(n, chunk) for chunk in _chunks(candidates, chunk_size)]

    criterion = 0
    done = 0

    def _absorb(results: List[Tuple[int, int, str]]) -> None:
        nonlocal criterion
        for w, b, rule in results:
            criterion += 1
            db.add(w, b, KindMask.Z, Rule(rule))
            db.add(w, b, KindMask.BEC, Rule.L2)

    try:
        if settings.workers <= 1:
            for job in jobs:
                _absorb(_certify_chunk(job))
                done += len(job[1])
                budget.check(done, what=f"database build for n={n}")
        else:
            with ProcessPoolExecutor(max_workers=settings.workers) as pool:
                try:
                    for job, results in zip(jobs, pool.map(_certify_chunk, jobs)):
                        _absorb(results)
                        done += len(job[1])
                        budget.check(done, what=f"database build for n={n}")
                except BudgetExceededError:
                    pool.shutdown(wait=False, cancel_futures=True)
                    raise
    except BudgetExceededError as e:
        logger.warning("%s; keeping a partial database", e.message)
        db.complete = False
        db.config["budget"] = {"elapsed": e.elapsed, "pairs_done": e.pairs_done}

    db.config["criterion"] = criterion
    db.config["full_criterion"] = full_criterion
    if transitive and db.complete:
        added = db.transitive_close(KindMask.Z)
        db.transitive = True
        db.config["z_closure"] = db.count(KindMask.Z)
        logger.info("transitive closure added %d Z pairs", added)
    return db


# Queries


def stats(db: PoDb) -> DbStats:
    """
    Counts and proportions of the known orders over all C(2^n, 2) pairs.

    Raises:
        IncompleteDatabaseError: If the build was cut short
    """
    if not db.complete:
        raise IncompleteDatabaseError("statistics need a complete database", details={"n": db.n})
    total = db.total_pairs
    deg = db.count(KindMask.DEG)
    z_total = sum(1 for w, b in db.pairs(KindMask.Z) if db.rule(w, b, KindMask.Z) is not Rule.TRANS)
    z_closure = db.count(KindMask.Z) if db.transitive else None
    # binary files carry no provenance
    criterion = db.config.get("criterion", z_total - deg)
    z_new = z_total - deg
    unknown = total - z_total
    return DbStats(
        n=db.n,
        total_pairs=total,
        deg=deg,
        criterion=criterion,
        z_new=z_new,
        z_total=z_total,
        z_total_disjoint=deg + criterion,
        z_closure=z_closure,
        p=db.count(KindMask.P),
        unknown=unknown,
        deg_base=db.config.get("deg_base"),
        deg_rule3=db.config.get("deg_rule3"),
        deg_config=db.config.get("deg_config"),
        proportions={
            "deg": deg / total if total else 1.0,
            "z_new": z_new / total if total else 0.0,
            "unknown": unknown / total if total else 0.0,
        },
        complete=db.complete,
        config=db.config,
    )


def contains_pu(db: PoDb, order: Optional[BitOrder] = None) -> bool:
    """
    Whether the five criterion-only pairs lie in P_b minus P_k.

    The first index of each published pair is the better channel.

    Raises:
        IncompleteDatabaseError: If the database is partial
        UsageError: If the database is not for n = 10
    """
    if not db.complete:
        raise IncompleteDatabaseError("P_u check needs a complete database")
    if db.n != 10:
        raise UsageError("P_u pairs are defined for n = 10", details={"n": db.n})
    order = order or BitOrder(db.config.get("bit_order", BitOrder.MSB.value))
    for better, worse in PU_PAIRS:
        w, b = index_code(worse, db.n, order), index_code(better, db.n, order)
        if not db.has(w, b, KindMask.Z) or db.has(w, b, KindMask.DEG):
            return False
    return True


def validate_bit_order(db: PoDb) -> Optional[BitOrder]:
    """The single index convention under which ``contains_pu`` holds, recorded in the config."""
    valid = [order for order in BitOrder if contains_pu(db, order)]
    if len(valid) != 1:
        logger.warning("P_u pairs validate under %d conventions", len(valid))
        return None
    db.config["bit_order"] = valid[0].value
    return valid[0]


def export(
    db: PoDb,
    fmt: str,
    path: Optional[Union[str, FsPath]] = None,
    kind: Kind = Kind.Z,
) -> Union[str, bytes]:
    """
    Serialize the database as ``json``, ``binary`` or ``dot``.

    Args:
        db: Database to export
        fmt: Output format
        path: File to write; the payload is only returned when omitted
        kind: Kind drawn by the dot export

    Raises:
        UsageError: For an unknown format
        SinkError: If the file cannot be written
    """
    if fmt == "json":
        payload: Union[str, bytes] = db.to_document().model_dump_json()
    elif fmt == "binary":
        payload = db.to_binary()
    elif fmt == "dot":
        payload = db.to_dot(kind)
    else:
        raise UsageError(f"unknown export format '{fmt}'", details={"format": fmt})

    if path is not None:
        try:
            target = FsPath(path)
            if isinstance(payload, bytes):
                target.write_bytes(payload)
            else:
                target.write_text(payload, encoding="utf-8")
        except OSError as e:
            raise SinkError(f"cannot write {path}: {e}", details={"path": str(path)}) from e
    return payload


def load(path: Union[str, FsPath]) -> PoDb:
    """
    Read a json or binary database, detected by its first bytes.

    Raises:
        UnknownDatabaseFormatError: If the file is neither format
        UsageError: If the file cannot be read
    """
    try:
        data = FsPath(path).read_bytes()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e}", details={"path": str(path)}) from e
    if data.startswith(MAGIC):
        return PoDb.from_binary(data)
    try:
        return PoDb.from_document(DbDocument.model_validate_json(data))
    except (ValidationError, ValueError, json.JSONDecodeError) as e:
        raise UnknownDatabaseFormatError(
            f"{path} is neither a json nor a binary polarpo database", errors=[str(e)]
        ) from e
