"""
Tests for BMSC enclosures and the Z / P provers.
"""

from fractions import Fraction

import numpy as np
import pytest

from polarpo.exceptions import DimensionError, InvalidEnclosureError, LengthMismatchError
from polarpo.models.verdicts import Interval
from polarpo.orders.bounds import (
    BmscBounds,
    as_enclosure,
    bridge,
    l0,
    l0_iter,
    sqrt_down,
    sqrt_up,
    t_interval,
    z_interval,
)

HALF = Fraction(1, 2)
FIFTH = Fraction(1, 5)


def test_sqrt_rounding() -> None:
    """Test outward rounding of square roots."""
    assert sqrt_down(Fraction(9, 16)) == sqrt_up(Fraction(9, 16)) == Fraction(3, 4)
    lo, hi = sqrt_down(Fraction(2)), sqrt_up(Fraction(2))
    assert lo * lo < 2 < hi * hi
    assert hi - lo <= Fraction(1, 1 << 95)
    assert sqrt_up(Fraction(1, 2)) <= 1


def test_as_enclosure() -> None:
    """Test coercion of points and pairs."""
    assert as_enclosure(HALF) == Interval(lo=HALF, hi=HALF)
    assert as_enclosure((0, "1/2")).hi == HALF


@pytest.mark.parametrize("bad", [(Fraction(1, 5), Fraction(3, 2)), (HALF, Fraction(1, 4)), -1])
def test_as_enclosure_rejects(bad: object) -> None:
    """Test that anything outside [0, 1] is an invalid enclosure."""
    with pytest.raises(InvalidEnclosureError):
        as_enclosure(bad)


def test_l0() -> None:
    """Test the single-step lower bound against sqrt(7)/4."""
    bound = l0(HALF)
    assert bound.lo * bound.lo <= Fraction(7, 16) <= bound.hi * bound.hi
    assert abs(float(bound.lo) - 0.6614378277661477) < 1e-12
    assert l0_iter(1, HALF) == bound


def test_z_interval_zero_step() -> None:
    """Test the enclosure of Z(W^0) for Z(W) = 1/2."""
    enc = z_interval("0", HALF)

    assert enc.hi == Fraction(3, 4)
    assert abs(float(enc.lo) - 0.6614378277661477) < 1e-12


def test_z_interval_one_step_is_exact() -> None:
    """Test that the 1 transform is known exactly."""
    assert z_interval("1", HALF) == Interval(lo=Fraction(1, 4), hi=Fraction(1, 4))


def test_z_interval_contains_bec_and_bsc() -> None:
    """Test that the BEC and BSC values lie inside the enclosure."""
    enc = z_interval("01", HALF)
    # the BEC attains the upper end
    assert enc.hi == Fraction(9, 16)
    assert enc.lo <= Fraction(9, 16)


def test_t_interval_zero_step_is_exact() -> None:
    """Test that T(W^0) = 2T - T^2 exactly."""
    assert t_interval("0", FIFTH) == Interval(lo=Fraction(9, 25), hi=Fraction(9, 25))


def test_t_interval_one_step() -> None:
    """Test the T enclosure through a 1 transform."""
    enc = t_interval("1", FIFTH)

    assert enc.lo == Fraction(1, 25)
    assert enc.hi == Fraction(9, 25)


def test_t_interval_with_hint_narrows() -> None:
    """Test that a Z hint never widens the enclosure."""
    plain = t_interval("10", FIFTH)
    hinted = t_interval("10", FIFTH, x_hint=Fraction(2, 5))

    assert plain.lo <= hinted.lo <= hinted.hi <= plain.hi


def test_t_interval_inconsistent_hint() -> None:
    """Test that T = 1/2 with Z = 1/10 is rejected (T never exceeds Z)."""
    with pytest.raises(InvalidEnclosureError):
        t_interval("0", HALF, x_hint=Fraction(1, 10))


def _bec_parameter(path: str, eps: Fraction) -> Fraction:
    """Bhattacharyya parameter of BEC(eps) after the transforms of ``path``."""
    for bit in path:
        eps = eps * eps if bit == "1" else 2 * eps - eps * eps
    return eps


@pytest.mark.parametrize("length", range(9))
def test_bec_values_inside_enclosures(length: int) -> None:
    """Test Z and T of transformed erasure channels against both enclosures."""
    rng = np.random.default_rng(length)
    for _ in range(64):
        den = int(rng.integers(1, 65))
        eps = Fraction(int(rng.integers(0, den + 1)), den)
        path = "".join(str(b) for b in rng.integers(0, 2, size=length))
        exact = _bec_parameter(path, eps)

        z_range = z_interval(path, eps)
        assert z_range.contains(exact)
        assert z_range.hi == exact
        # T = Z on the erasure channel
        assert t_interval(path, eps, x_hint=eps).contains(exact)


def test_bridge() -> None:
    """Test the Z to T bridge at a point."""
    enc = bridge(Fraction(3, 5))
    # 1 - sqrt(1 - 9/25) = 1/5
    assert enc == Interval(lo=FIFTH, hi=Fraction(3, 5))


def test_prove_z_reduced_shape(bounds: BmscBounds) -> None:
    """Test that a better path starting with 1 uses the reduced premise."""
    result = bounds.prove_Z("1100", "1011")

    assert result.proven
    assert result.rule == "prop10"
    assert result.premise == ("1100", "0111")
    assert result.residual_degree is not None


def test_prove_z_general_shape(bounds: BmscBounds) -> None:
    """Test the DEG-incomparable pair of length 3."""
    result = bounds.prove_Z("100", "011")

    assert result.proven
    assert result.rule == "prop9"
    assert result.premise == ("1100", "0111")


def test_prove_z_thm3_shape(bounds: BmscBounds) -> None:
    """Test that a worse path ending in 1 halves the premise further."""
    result = bounds.prove_Z("110001", "101101")

    assert result.proven
    assert result.rule == "thm3"
    assert result.premise == ("11000", "01101")
    assert "prop10" in result.alternatives


def test_prove_z_unreduced_agrees(bounds: BmscBounds) -> None:
    """Test that the full criterion certifies the pair and reports the premise it checked."""
    result = bounds.prove_Z("1100", "1011", reduce=False)

    assert result.proven
    assert result.strategy == "prop9"
    assert result.rule == "prop9"
    assert result.premise == ("11100", "10111")
    assert "prop10" in result.alternatives
    assert "prop9" not in result.alternatives


def test_prove_z_undecided(bounds: BmscBounds) -> None:
    """Test that a false relation is reported as not proven."""
    result = bounds.prove_Z("10", "01")

    assert not result.proven
    assert result.certificate is None


def test_prove_z_length_mismatch(bounds: BmscBounds) -> None:
    """Test that unequal lengths are refused."""
    with pytest.raises(LengthMismatchError):
        bounds.prove_Z("10", "011")


@pytest.mark.parametrize(
    "alpha,gamma,strategy",
    [("1000", "0111", "S2"), ("10010", "01111", "S2"), ("11000", "10111", "S1")],
)
def test_prove_p(bounds: BmscBounds, alpha: str, gamma: str, strategy: str) -> None:
    """Test the strategy that certifies each P pair."""
    result = bounds.prove_P(alpha, gamma)

    assert result.proven
    assert result.strategy == strategy


def test_prove_p_undecided(bounds: BmscBounds) -> None:
    """Test that a false P relation is not proven."""
    assert not bounds.prove_P("10", "01").proven


def test_theorem_checks(bounds: BmscBounds) -> None:
    """Test the staircase checks on small parameters."""
    assert bounds.theorem1_check(0, 1, 1, 0)
    assert not bounds.theorem1_check(0, 2, 1, 1)
    assert not bounds.theorem2_check(1, 1, 1, 1)


@pytest.mark.parametrize("args", [(0, 0, 1, -1), (1, 1, 0, 2), (0, 1, 1, 1)])
def test_theorem_checks_reject_dimensions(bounds: BmscBounds, args: tuple) -> None:
    """Test the parameter preconditions."""
    with pytest.raises(DimensionError):
        bounds.theorem2_check(*args)


def test_corollary_check(bounds: BmscBounds) -> None:
    """Test the counting criterion in lemma mode."""
    assert bounds.corollary_check("11011011", "00000011", "Z")
    assert not bounds.corollary_check("111", "000", "Z")
    # P needs 2^(k+1) + k + 1 <= n, which fails for k = 2, n = 8
    assert not bounds.corollary_check("11011011", "00000011", "P")


def test_corollary_modes(bounds: BmscBounds) -> None:
    """Test the two readings of the length condition."""
    assert bounds.corollary_applies(8, 2, "Z", mode="lemma")
    assert bounds.corollary_applies(8, 2, "Z", mode="real")
    assert not bounds.corollary_applies(1, 0, "Z")


def test_corollary_rejects_unknown_kind(bounds: BmscBounds) -> None:
    """Test that only Z and P are covered."""
    with pytest.raises(ValueError):
        bounds.corollary_check("11", "00", "BEC")
