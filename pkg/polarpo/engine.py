"""
Partial-order engine façade.
"""

import logging
from pathlib import Path as FsPath
from typing import Any, Iterable, List, Optional, Sequence, Tuple, Union

from polarpo import beta as beta_mod
from polarpo import podb
from polarpo.exceptions import UsageError
from polarpo.models.channels import BmsChannel, GenieEstimate, InfoSet, SimResult
from polarpo.models.config import EngineSettings
from polarpo.models.database import DbStats, WindowReport
from polarpo.models.relations import Kind, Rule
from polarpo.models.verdicts import Comparison, Direction
from polarpo.orders.bec import BecOrder
from polarpo.orders.bounds import BmscBounds
from polarpo.orders.degradation import DegradationOrder
from polarpo.orders.rules import RuleEngine
from polarpo.paths import PathLike, as_path
from polarpo.poly import clear_z_cache
from polarpo.session import ReliabilitySession
from polarpo.sim import construct, montecarlo

logger = logging.getLogger(__name__)

RELATIONS = ("deg", "bec", "z", "p", "auto")


class PartialOrderEngine:
    """
    Entry point bundling the order services, the database and the simulator.

    Example:
        >>> with PartialOrderEngine(load_env=False, workers=1) as engine:
        ...     engine.compare("0", "0", "deg").verdict
        'EQUAL'
    """

    def __init__(
        self,
        settings: Optional[EngineSettings] = None,
        load_env: bool = True,
        **overrides: Any,
    ) -> None:
        """
        Initialize the engine.

        Args:
            settings: Ready settings; built from ``overrides`` and POLARPO_*
                variables when omitted
            load_env: Whether to load a .env file first
            **overrides: Explicit settings (workers, bit_order, db_dir, ...)
        """
        self.settings = settings or EngineSettings.from_env(load_env=load_env, **overrides)
        self._degradation: Optional[DegradationOrder] = None
        self._bec: Optional[BecOrder] = None
        self._bounds: Optional[BmscBounds] = None
        self._rules: Optional[RuleEngine] = None

    # services

    @property
    def degradation(self) -> DegradationOrder:
        if self._degradation is None:
            self._degradation = DegradationOrder(self.settings)
        return self._degradation

    @property
    def bec(self) -> BecOrder:
        if self._bec is None:
            self._bec = BecOrder(self.settings)
        return self._bec

    @property
    def bounds(self) -> BmscBounds:
        if self._bounds is None:
            self._bounds = BmscBounds(self.settings, bec=self.bec)
        return self._bounds

    @property
    def rules(self) -> RuleEngine:
        if self._rules is None:
            self._rules = RuleEngine(self.settings, deg=self.degradation, bec=self.bec, bounds=self.bounds)
        return self._rules

    # comparisons

    def compare(self, first: PathLike, second: PathLike, relation: str = "auto") -> Comparison:
        """
        Compare two equal-length paths.

        Args:
            first: First path
            second: Second path
            relation: ``deg``, ``bec``, ``z``, ``p`` or ``auto`` (strongest
                derivable kind, with a proof)

        Raises:
            UsageError: For an unknown relation or malformed paths
        """
        relation = relation.lower()
        if relation not in RELATIONS:
            raise UsageError(f"unknown relation '{relation}'", details={"relation": relation})
        a, g = self.degradation._pair(first, second)
        base = {"first": a, "second": g, "relation": relation}
        if relation == "deg":
            return self._compare_deg(a, g, base)
        if relation == "bec":
            return self._compare_bec(a, g, base)
        if relation in ("z", "p"):
            return self._compare_prover(a, g, Kind(relation.upper()), base)
        return self._compare_auto(a, g, base)

    @staticmethod
    def _statement(kind: Kind, worse: str, better: str) -> str:
        return f"{worse or 'ε'} {kind.symbol} {better or 'ε'}"

    def _oriented(self, kind: Kind, a: str, g: str, direction: Direction) -> str:
        if direction is Direction.LEQ:
            return self._statement(kind, a, g)
        if direction is Direction.GEQ:
            return self._statement(kind, g, a)
        return direction.value

    def _compare_deg(self, a: str, g: str, base: dict) -> Comparison:
        v = self.degradation.deg_leq(a, g)
        return Comparison(
            **base, kind=Kind.DEG.value, direction=v.direction,
            verdict=self._oriented(Kind.DEG, a, g, v.direction),
            rule=Rule.DEG.value if v.direction in (Direction.LEQ, Direction.GEQ) else None,
            certificate="bfs" if v.comparable else None, trace=v.trace,
        )

    def _compare_bec(self, a: str, g: str, base: dict) -> Comparison:
        v = self.bec.bec_leq(a, g)
        witness = v.witness_leq if v.witness_leq is not None else v.witness_geq
        return Comparison(
            **base, kind=Kind.BEC.value, direction=v.relation,
            verdict=self._oriented(Kind.BEC, a, g, v.relation),
            certificate=v.certificate.value,
            witness=None if witness is None else str(witness),
        )

    def _compare_prover(self, a: str, g: str, kind: Kind, base: dict) -> Comparison:
        if a == g:
            return Comparison(**base, kind=kind.value, direction=Direction.EQUAL, verdict="EQUAL")
        prove = self.bounds.prove_Z if kind is Kind.Z else self.bounds.prove_P
        for worse, better, direction in ((a, g, Direction.LEQ), (g, a, Direction.GEQ)):
            result = prove(worse, better)
            if result.proven:
                return Comparison(
                    **base, kind=kind.value, direction=direction,
                    verdict=self._statement(kind, worse, better),
                    rule=result.rule, strategy=result.strategy,
                    premise=self._statement(Kind.BEC, *result.premise) if result.premise else None,
                    certificate=result.certificate.value if result.certificate else None,
                    residual_degree=result.residual_degree,
                )
        return Comparison(**base, kind=kind.value, verdict="UNDECIDED")

    def _compare_auto(self, a: str, g: str, base: dict) -> Comparison:
        deg = self._compare_deg(a, g, base)
        if deg.direction is not Direction.INCOMPARABLE:
            if deg.direction is not Direction.EQUAL:
                deg.also.extend([Kind.Z.value, Kind.P.value, Kind.BEC.value])
            return deg

        bec = self._compare_bec(a, g, base)
        if bec.direction is Direction.INCOMPARABLE:
            return bec
        directions: List[Tuple[str, str, Direction]] = []
        if bec.direction in (Direction.LEQ, Direction.EQUAL):
            directions.append((a, g, Direction.LEQ))
        if bec.direction in (Direction.GEQ, Direction.EQUAL):
            directions.append((g, a, Direction.GEQ))

        found = []
        for kind in (Kind.Z, Kind.P):
            for worse, better, direction in directions:
                rel = self.rules.derive_pair(worse, better, kind)
                if rel is not None:
                    found.append((kind, direction, rel))
                    break
        if not found:
            bec.also = []
            return bec
        kind, direction, rel = found[0]
        also = [k.value for k, d, _ in found[1:] if d is direction] + [Kind.BEC.value]
        return Comparison(
            **base, kind=kind.value, direction=direction,
            verdict=rel.statement(), rule=rel.rule.value,
            premise=rel.premises[0].statement() if len(rel.premises) == 1 else None,
            certificate=rel.certificate, proof=rel.to_text(), also=also,
        )

    # database

    def build_db(
        self,
        n: int,
        rule3: Optional[bool] = None,
        transitive: bool = False,
        full_criterion: bool = False,
    ) -> podb.PoDb:
        """Build the order database for length n (see :func:`polarpo.podb.build`)."""
        return podb.build(n, self.settings, rule3=rule3, transitive=transitive, full_criterion=full_criterion)

    def resolve(self, path: Union[str, FsPath]) -> FsPath:
        """Relative database paths fall back to the configured directory."""
        p = FsPath(path)
        if p.is_absolute() or p.exists():
            return p
        return self.settings.db_dir / p

    def load_db(self, path: Union[str, FsPath]) -> podb.PoDb:
        return podb.load(self.resolve(path))

    def stats(self, db: podb.PoDb) -> DbStats:
        return podb.stats(db)

    def saturate(
        self, n: int, rules: Optional[Iterable[Rule]] = None, tau_budget: Optional[int] = None
    ) -> podb.PoDb:
        return self.rules.saturate(n, rules=rules, tau_budget=tau_budget)

    def beta_window(self, db: podb.PoDb, kind: Union[Kind, str] = Kind.Z) -> WindowReport:
        return beta_mod.feasible_window(db, kind)

    # simulation

    def info_set(
        self, n: int, K: int, method: str, mods: Optional[Sequence[Tuple[int, int]]] = None
    ) -> InfoSet:
        return construct.build_info_set(n, K, method, mods=mods, order=self.settings.bit_order)

    def simulate(
        self,
        points: Sequence[Tuple[Optional[float], BmsChannel]],
        info_set: InfoSet,
        frames: int,
        seed: int = 0,
        rule: str = "exact",
    ) -> List[SimResult]:
        return montecarlo.simulate(
            points, info_set, frames, seed=seed, workers=self.settings.workers, rule=rule
        )

    def genie(self, channel: BmsChannel, alpha: PathLike, trials: int, seed: int = 0) -> GenieEstimate:
        return montecarlo.genie_estimate(channel, as_path(alpha), trials, seed=seed)

    def fetch_reliability(
        self, url: str, path: Optional[Union[str, FsPath]] = None, timeout: float = 30.0
    ) -> List[int]:
        """Download a reliability sequence, saving it when a path is given."""
        with ReliabilitySession(timeout=timeout) as session:
            if path is None:
                return session.fetch_sequence(url)
            return session.save_sequence(url, path)

    # lifecycle

    def close(self) -> None:
        """Drop memoised polynomials and derivations."""
        if self._rules is not None:
            self._rules.clear_cache()
        BecOrder.clear_cache()
        clear_z_cache()

    def __enter__(self) -> "PartialOrderEngine":
        """Context manager entry."""
        return self

    def __exit__(self, *args: Any) -> None:
        """Context manager exit."""
        self.close()
