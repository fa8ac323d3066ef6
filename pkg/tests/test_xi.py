"""Exact coefficient algebra: enumeration, convolution, weights, sign law."""

import math
from fractions import Fraction

import pytest

from truncgauss.errors import DomainError
from truncgauss.special import double_factorial
from truncgauss.xi import (
    ExponentVector,
    dd_limit_coefficient,
    dn_limit_coefficient,
    enumerate_exponents,
    gap_convolution_check,
    gap_limit_coefficient,
    inverse_mass_identity_check,
    omega,
    omega_inequality_scan,
    power_count,
    psi,
    psi_grouped,
    xi_alpha_limit,
    xi_product,
)

# number of integer partitions of 0..12
PARTITIONS = [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77]


class TestEnumeration:
    def test_small_cases(self):
        assert enumerate_exponents(1, 1) == ((1,),)
        assert set(enumerate_exponents(2, 2)) == {(2, 0), (0, 1)}

    def test_lexicographic_order(self):
        tails = enumerate_exponents(4, 4)
        assert tails == tuple(sorted(tails))

    def test_counts_are_partition_numbers(self):
        for q in range(0, 13):
            assert len(enumerate_exponents(q, q)) == PARTITIONS[q]

    def test_zero_above_power_count(self):
        for tail in enumerate_exponents(6, 3):
            assert all(e == 0 for e in tail[3:])

    def test_power_count(self):
        assert power_count((2, 0, 1)) == 2 + 3
        vec = ExponentVector((5, 1, 2))
        assert vec.q == 2 and vec.power_count == 5 and vec.tail == (1, 2)

    def test_bounds(self):
        with pytest.raises(DomainError):
            enumerate_exponents(13, 1)


class TestXiProduct:
    def test_identity_element(self):
        one = {(0, (0,)): Fraction(1)}
        assert xi_product(one, one, 0, (0,)) == 1
        assert xi_product(one, one, 2, (0, 0, 1)) == 0

    def test_single_integral_product_grouping(self):
        # the product of two single-integral maps is supported exactly on
        # patterns with two unit entries (or one entry equal to two) whose
        # positions sum to the order
        def single_map(k, q_max):
            out = {}
            for q in range(q_max + 1):
                e = (0,) * q + (1,)
                out[(q, e)] = Fraction(
                    double_factorial(2 * (k + q) - 1), math.factorial(q))
            return out

        r, s = 1, 2
        f, g = single_map(r, 4), single_map(s, 4)
        q = 3
        # two distinct unit positions 1 and 2: contributions from both splits
        got = xi_product(f, g, q, (0, 1, 1, 0))
        want = (Fraction(double_factorial(2 * (r + 1) - 1), 1)
                * Fraction(double_factorial(2 * (s + 2) - 1), math.factorial(2))
                + Fraction(double_factorial(2 * (r + 2) - 1), math.factorial(2))
                * Fraction(double_factorial(2 * (s + 1) - 1), 1))
        assert got == want
        # doubled entry at position 2 needs an even order split 2 + 2
        got = xi_product(f, g, 4, (0, 0, 2, 0, 0))
        want = (Fraction(double_factorial(2 * (r + 2) - 1), 2)
                * Fraction(double_factorial(2 * (s + 2) - 1), 2))
        assert got == want
        # a pattern nobody can build vanishes
        assert xi_product(f, g, 3, (1, 1, 1, 0)) == 0

    def test_associativity_on_random_maps(self):
        import random

        rng = random.Random(7)

        def random_map(q_max):
            out = {}
            for q in range(q_max + 1):
                for e0 in range(2):
                    for tail in enumerate_exponents(q, q):
                        if rng.random() < 0.6:
                            out[(q, (e0,) + tail)] = Fraction(
                                rng.randint(-4, 4), rng.randint(1, 3))
            return out

        def full_product(f, g, q_max):
            out = {}
            for q in range(q_max + 1):
                for e0 in range(3):
                    for tail in enumerate_exponents(q, q):
                        e = (e0,) + tail
                        val = xi_product(f, g, q, e)
                        if val:
                            out[(q, e)] = val
            return out

        f, g, h = random_map(3), random_map(3), random_map(3)
        left = full_product(full_product(f, g, 3), h, 3)
        right = full_product(f, full_product(g, h, 3), 3)
        assert left == right


class TestSingleIntegralLimit:
    def test_order_zero(self):
        assert xi_alpha_limit(0, (0,), 0) == 1
        assert xi_alpha_limit(0, (0,), 3) == double_factorial(5)

    def test_order_one(self):
        assert xi_alpha_limit(1, (0, 1), 1) == 3
        assert xi_alpha_limit(1, (0, 1), 0) == 1

    def test_wrong_pattern_vanishes(self):
        assert xi_alpha_limit(2, (0, 2, 0), 1) == 0
        assert xi_alpha_limit(2, (0, 1, 0), 1) == 0
        assert xi_alpha_limit(3, (0, 0, 0, 1), 2) == Fraction(
            double_factorial(2 * 5 - 1), 6)


class TestPsi:
    def test_base_cases(self):
        assert psi(0, ()) == 1
        assert psi(0, (0, 0)) == 1
        assert psi(1, (1,)) == 2

    def test_wrong_power_count_vanishes(self):
        assert psi(2, (1,)) == 0
        assert psi(1, (0, 1)) == 0

    def test_hand_value(self):
        # (2, 0): splits (0|2), (1|1), (2|0) each with unit weights -> 3
        assert psi(2, (2, 0)) == 3
        # (0, 1): the 2-part moves whole -> 2
        assert psi(2, (0, 1)) == 2
        # (1, 1, 1): the two full/empty splits carry 3! each, the six
        # proper splits carry 2 each -> 24
        assert psi(6, (1, 1, 1)) == 24

    def test_routes_agree_exhaustively(self):
        for q in range(0, 9):
            for tail in enumerate_exponents(q, q):
                assert psi(q, tail) == psi_grouped(q, tail)


class TestOmega:
    def test_low_order_values(self):
        assert omega(0, 1, (1,)) == 0 and omega(1, 1, (1,)) == 1
        assert omega(0, 2, (2, 0)) == 0 and omega(1, 2, (2, 0)) == 2
        assert omega(0, 2, (0, 1)) == 0 and omega(1, 2, (0, 1)) == 4

    def test_first_nonzero_pairing(self):
        # order three with tail (1, 1, 0): positions 1 and 2 pair up
        assert omega(0, 3, (1, 1, 0)) == 1 * psi(0, (0, 0, 0))

    def test_power_count_mismatch_raises(self):
        with pytest.raises(DomainError):
            omega(0, 2, (1, 0))
        with pytest.raises(DomainError):
            omega(1, 3, (1, 0, 1))


class TestGapLimit:
    def test_reference_values(self):
        assert gap_limit_coefficient(1, (1,)) == 4
        assert gap_limit_coefficient(2, (2, 0)) == -8
        assert gap_limit_coefficient(2, (0, 1)) == 24

    def test_third_order_hand_values(self):
        # (0,0,1): single weight 9, prefactor 4*(5!!/3!)    -> +90
        # (1,1,0): weights 1 vs 10, prefactor 4*(3!!/2!)    -> -54
        # (3,0,0): single weight 3, unit semifactorials     -> +12
        assert gap_limit_coefficient(3, (0, 0, 1)) == 90
        assert gap_limit_coefficient(3, (1, 1, 0)) == -54
        assert gap_limit_coefficient(3, (3, 0, 0)) == 12

    def test_sign_law_exhaustive(self):
        for q in range(1, 7):
            for tail in enumerate_exponents(q, q):
                value = gap_limit_coefficient(q, tail)
                want = (-1) ** (sum(tail) - 1)
                assert value != 0
                assert (1 if value > 0 else -1) == want

    def test_omega_gap_strict_through_eight(self):
        for q in range(1, 9):
            for tail in enumerate_exponents(q, q):
                assert omega(0, q, tail) < omega(1, q, tail)

    def test_magnitude_when_no_pairings(self):
        for q in range(1, 7):
            for tail in enumerate_exponents(q, q):
                if omega(0, q, tail) == 0:
                    weight = Fraction(1)
                    for k, e in enumerate(tail, start=1):
                        weight *= Fraction(double_factorial(2 * k - 1),
                                           math.factorial(k)) ** e
                    assert abs(gap_limit_coefficient(q, tail)) == (
                        4 * weight * omega(1, q, tail))


class TestScans:
    def test_omega_inequality_scan(self):
        report = omega_inequality_scan(8)
        assert report.all_ok
        names = [c.name for c in report.checks]
        assert "pointwise-weight-inequality" in names

    def test_convolution_routes_agree(self):
        report = gap_convolution_check(4)
        assert report.all_ok
        # each admissible tail gets its own comparison line
        count = sum(1 for c in report.checks
                    if c.name.startswith("route-equivalence"))
        assert count == sum(PARTITIONS[q] for q in range(1, 5))

    def test_numerator_denominator_supports(self):
        # the gap numerator allows a unit zeroth exponent, the inverse mass
        # does not
        assert dn_limit_coefficient(1, (1, 1)).value_at_limit == 4
        assert dn_limit_coefficient(1, (0, 1)).value_at_limit == 0
        assert dd_limit_coefficient(1, (1, 1)).value_at_limit == 0
        assert dd_limit_coefficient(1, (0, 1)).value_at_limit == -2

    def test_inverse_mass_identity(self):
        report = inverse_mass_identity_check(4)
        assert report.all_ok
