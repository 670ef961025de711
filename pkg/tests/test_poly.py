"""
Tests for exact polynomial arithmetic and the sign test on [0, 1].
"""

from fractions import Fraction

import numpy as np
import pytest

from polarpo.models.verdicts import Certificate
from polarpo.poly import (
    Z0,
    Z1,
    RatPoly,
    capacity_poly,
    nonneg_on_unit,
    poly_arith,
    z_eval,
    z_map,
    z_poly,
)


def test_compose() -> None:
    """Test that x^2 composed with 2x - x^2 expands exactly."""
    assert Z1.compose(Z0) == RatPoly([0, 0, 4, -4, 1])
    assert poly_arith(Z1, Z0, "compose") == RatPoly([0, 0, 4, -4, 1])


def test_arith_rejects_unknown_operation() -> None:
    """Test that poly_arith only knows four operations."""
    with pytest.raises(ValueError, match="unknown polynomial operation"):
        poly_arith(Z0, Z1, "div")


def test_rational_coefficients_are_canonical() -> None:
    """Test that equal polynomials with different scalings compare equal."""
    assert RatPoly([Fraction(1, 2), 1]) * 2 == RatPoly([1, 2])
    assert RatPoly([0, 0]).is_zero()
    assert RatPoly([1, 2, 0]).degree == 1


def test_z_poly_values() -> None:
    """Test Z_10 and Z_01 at one half."""
    assert z_poly("10")(Fraction(1, 2)) == Fraction(7, 16)
    assert z_poly("01")(Fraction(1, 2)) == Fraction(9, 16)
    assert z_poly("")(Fraction(1, 3)) == Fraction(1, 3)


def test_z_poly_leading_ones() -> None:
    """Test that leading 1s match explicit composition."""
    assert z_poly("110") == Z0.compose(Z1.compose(Z1))
    assert z_poly("110").degree == 8


def test_z_eval_matches_poly() -> None:
    """Test the iterated-map evaluation against the expanded polynomial."""
    x = Fraction(3, 7)
    for alpha in ("0110", "1011", "0001", "111"):
        assert z_eval(alpha, x) == z_poly(alpha)(x)


def test_z_map_float() -> None:
    """Test the float evaluator against exact values."""
    xs = np.array([0.0, 0.25, 0.5, 1.0])
    expected = [float(z_poly("0101")(Fraction(x))) for x in (0, Fraction(1, 4), Fraction(1, 2), 1)]
    assert np.allclose(z_map("0101", xs), expected)


def test_capacity_poly_of_empty_path() -> None:
    """Test the capacity map of the empty path is the identity."""
    assert capacity_poly("") == RatPoly.x()


def test_nonneg_trivial() -> None:
    """Test polynomials that are nonnegative for structural reasons."""
    assert nonneg_on_unit(RatPoly()).certificate is Certificate.TRIVIAL
    assert nonneg_on_unit(RatPoly([0, 1, -1])).nonneg


def test_nonneg_double_root() -> None:
    """Test a square with a root inside the interval."""
    result = nonneg_on_unit(RatPoly([1, -4, 4]))
    assert result.nonneg
    assert result.witness is None


def test_negative_has_witness() -> None:
    """Test that a refutation comes with a point where the polynomial is negative."""
    d = RatPoly([Fraction(-1, 2), 1])
    result = nonneg_on_unit(d)

    assert not result.nonneg
    assert result.certificate is Certificate.WITNESS
    assert 0 <= result.witness <= 1
    assert d(result.witness) < 0


def test_bec_difference() -> None:
    """Test Z_01 - Z_10 = 2x^2 (1 - x)^2 is nonnegative and its negation is not."""
    d = z_poly("01") - z_poly("10")
    assert d == RatPoly([0, 0, 2, -4, 2])
    assert nonneg_on_unit(d).nonneg
    assert not nonneg_on_unit(-d).nonneg


def test_narrow_negative_dip() -> None:
    """Test a dip too narrow for the float grid is still refuted exactly."""
    # (x - 1/3)^2 - 10^-12 is negative only very close to 1/3
    d = RatPoly([Fraction(1, 9) - Fraction(1, 10**12), Fraction(-2, 3), 1])
    result = nonneg_on_unit(d)
    assert not result.nonneg
    assert d(result.witness) < 0
