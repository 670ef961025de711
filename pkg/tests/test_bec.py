"""
Tests for the BEC order.
"""

from fractions import Fraction
from itertools import combinations

import pytest

from polarpo.exceptions import DimensionError, LengthMismatchError
from polarpo.models.verdicts import Certificate, Direction
from polarpo.orders.bec import BecOrder, staircase_fact
from polarpo.paths import code_to_str
from polarpo.poly import chebyshev_grid, z_map, z_poly


@pytest.mark.parametrize(
    "alpha,gamma",
    [("01", "10"), ("1100", "0111"), ("0110", "1001"), ("1000", "0111")],
)
def test_bec_leq_examples(bec: BecOrder, alpha: str, gamma: str) -> None:
    """Test pairs whose first path is worse on every BEC."""
    verdict = bec.bec_leq(alpha, gamma)

    assert verdict.relation is Direction.LEQ
    assert verdict.certificate is not Certificate.WITNESS


def test_bec_geq_has_witness(bec: BecOrder) -> None:
    """Test that the refuted direction carries a dyadic witness."""
    verdict = bec.bec_leq("10", "01")

    assert verdict.relation is Direction.GEQ
    x = verdict.witness_leq
    assert x is not None
    assert z_poly("10")(x) < z_poly("01")(x)
    assert x.denominator & (x.denominator - 1) == 0


def test_bec_equal(bec: BecOrder) -> None:
    """Test identical paths."""
    verdict = bec.bec_leq("0101", "0101")

    assert verdict.relation is Direction.EQUAL
    assert verdict.certificate is Certificate.TRIVIAL


def test_bec_length_mismatch(bec: BecOrder) -> None:
    """Test that unequal lengths are refused."""
    with pytest.raises(LengthMismatchError):
        bec.bec_leq("0", "01")


def test_staircase_fact() -> None:
    """Test the closed-form threshold on both sides."""
    assert staircase_fact(1, 2) is True
    assert staircase_fact(1, 1) is False
    assert staircase_fact(0, 5) is True
    # for m >= 1 the inequality flips between n = 2^m - 1 and n = 2^m
    assert staircase_fact(3, 8) is True
    assert staircase_fact(3, 7) is False


def test_staircase_fact_large_uses_intervals() -> None:
    """Test exponents too large for plain integers."""
    assert staircase_fact(12, 1 << 12) is True
    assert staircase_fact(12, (1 << 12) - 1) is False


def test_staircase_fact_rejects_negative() -> None:
    """Test the precondition on the exponents."""
    with pytest.raises(DimensionError):
        staircase_fact(-1, 2)


@pytest.mark.parametrize(
    "m, n",
    [
        pytest.param(m, n, marks=pytest.mark.slow) if m + n >= 9 else (m, n)
        for m in range(4)
        for n in range(1, 9)
    ],
)
def test_staircase_fact_matches_polynomial_order(bec: BecOrder, m: int, n: int) -> None:
    """Test the closed form against the exact decision on 1^m0^n and 0^m1^n."""
    verdict = bec.bec_leq("1" * m + "0" * n, "0" * m + "1" * n, closed_forms=False)

    assert (verdict.relation is Direction.LEQ) == staircase_fact(m, n)
    assert verdict.certificate is not Certificate.CLOSED_FORM


def test_closed_form_agrees_with_polynomial(bec: BecOrder) -> None:
    """Test the staircase shortcut against the exact polynomial decision."""
    fast = bec.bec_leq("100", "011")
    slow = bec.bec_leq("100", "011", closed_forms=False)

    assert fast.certificate is Certificate.CLOSED_FORM
    assert fast.relation is slow.relation is Direction.LEQ
    assert slow.certificate is not Certificate.CLOSED_FORM


def test_verdicts_consistent_at_n4(bec: BecOrder) -> None:
    """Test every verdict at n = 4 against float samples and its witnesses."""
    n = 4
    grid = chebyshev_grid()
    for w, b in combinations(range(1 << n), 2):
        a, g = code_to_str(w, n), code_to_str(b, n)
        verdict = bec.bec_leq(a, g)
        diff = z_map(a, grid) - z_map(g, grid)
        if verdict.relation is Direction.LEQ:
            assert diff.min() > -1e-9
        elif verdict.relation is Direction.GEQ:
            assert diff.max() < 1e-9
        else:
            assert verdict.relation is Direction.INCOMPARABLE
            assert z_poly(a)(verdict.witness_leq) < z_poly(g)(verdict.witness_leq)
            assert z_poly(g)(verdict.witness_geq) < z_poly(a)(verdict.witness_geq)


def test_leq_boolean_form(bec: BecOrder) -> None:
    """Test the reflexive boolean helper."""
    assert bec.leq("01", "10")
    assert bec.leq("11", "11")
    assert not bec.leq("10", "01")


def test_witness_is_exact_point() -> None:
    """Test that a witness is a rational the polynomial can be evaluated at."""
    verdict = BecOrder().bec_leq("1", "0")
    x = verdict.witness_leq

    assert isinstance(x, Fraction)
    assert 0 < x < 1
    assert z_poly("1")(x) < z_poly("0")(x)
