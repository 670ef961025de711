"""
Tests for β-expansion weights and feasible β windows.
"""

from fractions import Fraction

import pytest

from polarpo.beta import (
    beta_order,
    beta_weight,
    constraint_coeffs,
    feasible_interval,
    feasible_window,
    index_weight,
    repair_order,
    violations,
    window_from_pairs,
)
from polarpo.exceptions import (
    DimensionError,
    IncompleteDatabaseError,
    InconsistentOrderError,
    LengthMismatchError,
    UsageError,
)
from polarpo.models.config import EngineSettings
from polarpo.models.paths import BitOrder
from polarpo.models.relations import Kind, KindMask
from polarpo.podb import PoDb, build

GOLDEN = 1.6180339887498949


def _db(n: int, pairs, kind: KindMask = KindMask.Z) -> PoDb:
    db = PoDb(n)
    for w, b in pairs:
        db.add(w, b, kind)
    return db


def test_beta_weight() -> None:
    """Test exact and float weights."""
    assert beta_weight("1100", 2) == 12
    assert beta_weight("101", Fraction(1, 2)) == Fraction(5, 4)
    assert beta_weight("011", 1.5) == pytest.approx(2.5)
    assert index_weight(719, 10, 2) == 719


def test_beta_weight_rejects_nonpositive() -> None:
    """Test that β must be positive."""
    with pytest.raises(DimensionError):
        beta_weight("01", 0)


def test_constraint_coeffs() -> None:
    """Test the ascending coefficients of B(better) - B(worse)."""
    assert constraint_coeffs("1100", "1011") == (1, 1, -1, 0)
    with pytest.raises(LengthMismatchError):
        constraint_coeffs("1", "10")


def test_feasible_interval_rational_endpoint() -> None:
    """Test a constraint whose root is rational."""
    assert [i.describe() for i in feasible_interval("01", "10")] == ["[1, ∞)"]


def test_feasible_interval_golden_ratio() -> None:
    """Test the window of 1100 below 1011 ends at the golden ratio."""
    (interval,) = feasible_interval("1100", "1011")

    assert interval.left.kind == "zero"
    assert interval.right.closed
    assert interval.right.approx == pytest.approx(GOLDEN, abs=1e-10)
    assert interval.right.lo * interval.right.lo <= interval.right.lo + 1
    assert interval.right.hi * interval.right.hi >= interval.right.hi + 1


def test_feasible_interval_cubic_root() -> None:
    """Test the root of β^3 - β^2 - 1."""
    (interval,) = feasible_interval("1010", "0111")
    assert interval.right.approx == pytest.approx(1.4655712319, abs=1e-9)


def test_window_from_pairs() -> None:
    """Test the intersection of two pair windows."""
    report = window_from_pairs([("01", "10"), ("1100", "1011")])

    assert report.pairs == 2
    assert len(report.union) == 1
    assert report.component.left.approx == 1.0
    assert report.component.left.closed
    assert report.component.right.approx == pytest.approx(GOLDEN, abs=1e-10)


def test_window_from_pairs_can_be_empty() -> None:
    """Test contradicting pairs leave no feasible β."""
    report = window_from_pairs([("0", "1"), ("1", "0")])

    assert report.union == []
    assert report.component is None


def test_window_needs_pairs() -> None:
    """Test that an empty pair list is refused."""
    with pytest.raises(UsageError):
        window_from_pairs([])


def test_feasible_window_n3(settings: EngineSettings) -> None:
    """Test the Z window of length 3 is [1, golden ratio]."""
    report = feasible_window(build(3, settings), Kind.Z)

    assert report.kind == "Z"
    assert report.component.describe() == "[1, 1.618033989]"
    assert len(report.union) == 1


def test_feasible_window_degradation_only(settings: EngineSettings) -> None:
    """Test that degradation pairs alone allow every β >= 1."""
    report = feasible_window(build(3, settings), "deg")
    assert report.component.describe() == "[1, ∞)"


def test_feasible_window_errors() -> None:
    """Test the window needs a complete database with pairs of the kind."""
    with pytest.raises(UsageError):
        feasible_window(PoDb(2), Kind.Z)
    with pytest.raises(IncompleteDatabaseError):
        feasible_window(PoDb(2, complete=False))


def test_violations() -> None:
    """Test stored pairs broken at a given β."""
    db = _db(2, [(0b01, 0b10)])

    assert violations(db, Fraction(1, 2)) == [("01", "10")]
    assert violations(db, 2) == []
    assert violations(db, 1) == []


def test_beta_order() -> None:
    """Test ranking by weight with ties broken by code."""
    assert beta_order(2, 2) == [0, 1, 2, 3]
    assert beta_order(3, 1) == [0, 1, 2, 4, 3, 5, 6, 7]
    assert sorted(beta_order(3, 1.2, BitOrder.LSB)) == list(range(8))
    assert beta_order(0, 1, BitOrder.LSB) == [0]


def test_repair_order_moves_forced_index() -> None:
    """Test that only the pair that forces a move changes the ranking."""
    db = _db(2, [(0b01, 0b10)])
    assert repair_order([0, 2, 1, 3], db) == [0, 1, 2, 3]
    assert repair_order([0, 1, 2, 3], db) == [0, 1, 2, 3]


def test_repair_order_rejects_bad_ranking() -> None:
    """Test that the ranking must be a permutation."""
    with pytest.raises(UsageError):
        repair_order([0, 1, 2], _db(2, [(0b01, 0b10)]))


def test_repair_order_detects_cycle() -> None:
    """Test that cyclic stored pairs are reported."""
    db = _db(2, [(0, 1), (1, 2), (2, 0)])
    with pytest.raises(InconsistentOrderError):
        repair_order([0, 1, 2, 3], db)
