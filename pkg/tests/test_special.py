"""Exact combinatorics and scalar special functions."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gammainc, hyp1f1

from truncgauss.errors import DomainError, NumericError
from truncgauss.special import (
    _lower_incomplete_gamma_vec,
    double_factorial,
    kummer_M,
    lower_incomplete_gamma,
    raising_factorial,
    stirling_first_unsigned,
    stirling_second,
)


class TestDoubleFactorial:
    def test_basic_values(self):
        assert double_factorial(5) == 15
        assert double_factorial(7) == 105
        assert double_factorial(-1) == 1
        assert double_factorial(0) == 1
        assert double_factorial(1) == 1
        assert double_factorial(6) == 48

    def test_below_domain(self):
        with pytest.raises(DomainError):
            double_factorial(-2)

    @given(st.integers(min_value=1, max_value=120))
    def test_strides_compose(self, n):
        assert double_factorial(n) == n * double_factorial(n - 2)


class TestStirling:
    def test_second_kind_values(self):
        assert stirling_second(3, 2) == 3
        assert stirling_second(4, 2) == 7
        for k in range(13):
            assert stirling_second(k, k) == 1
        assert stirling_second(2, 3) == 0

    def test_first_kind_values(self):
        assert stirling_first_unsigned(3, 1) == 2
        assert stirling_first_unsigned(4, 2) == 11
        for n in range(13):
            assert stirling_first_unsigned(n, n) == 1
        assert stirling_first_unsigned(2, 5) == 0

    @given(st.integers(min_value=1, max_value=60), st.integers(min_value=1, max_value=60))
    @settings(max_examples=60)
    def test_second_kind_recurrence(self, n, m):
        assert stirling_second(n + 1, m) == (
            m * stirling_second(n, m) + stirling_second(n, m - 1)
        )

    @given(st.integers(min_value=1, max_value=60), st.integers(min_value=1, max_value=60))
    @settings(max_examples=60)
    def test_first_kind_recurrence(self, n, m):
        assert stirling_first_unsigned(n + 1, m) == (
            n * stirling_first_unsigned(n, m) + stirling_first_unsigned(n, m - 1)
        )

    def test_inversion_identity_exhaustive(self):
        """Signed composition of the two kinds is the identity, indices <= 12."""
        for j in range(13):
            for k in range(13):
                total = sum(
                    (-1) ** (t - k) * stirling_second(j, t)
                    * stirling_first_unsigned(t, k)
                    for t in range(0, max(j, k) + 1)
                )
                assert total == (1 if j == k else 0)


class TestRaisingFactorial:
    def test_values(self):
        assert raising_factorial(0.5, 2) == 0.75
        assert raising_factorial(3.0, 0) == 1
        for n in range(8):
            assert raising_factorial(1, n) == math.factorial(n)

    def test_exact_on_fractions(self):
        from fractions import Fraction

        assert raising_factorial(Fraction(-3, 2), 3) == Fraction(3, 8)

    @given(st.integers(min_value=-6, max_value=6), st.integers(min_value=0, max_value=10))
    def test_shift_identity(self, x, n):
        # x^(n+1 rising) = x * (x+1)^(n rising)
        assert raising_factorial(x, n + 1) == x * raising_factorial(x + 1, n)


class TestLowerIncompleteGamma:
    def test_limits(self):
        assert lower_incomplete_gamma(0.5, 1e6) == pytest.approx(
            math.sqrt(math.pi), rel=1e-13)
        assert lower_incomplete_gamma(0.5, math.inf) == pytest.approx(
            math.sqrt(math.pi), rel=1e-15)
        assert lower_incomplete_gamma(3.2, 0.0) == 0.0

    def test_unit_shape_antiderivative(self):
        for x in (0.1, 0.9, 3.0, 17.5, 80.0):
            assert lower_incomplete_gamma(1.0, x) == pytest.approx(
                1.0 - math.exp(-x), rel=1e-13)

    def test_against_scipy(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            s = float(rng.uniform(0.05, 40.0))
            x = float(rng.uniform(0.0, 120.0))
            ref = gammainc(s, x) * math.gamma(s)
            assert lower_incomplete_gamma(s, x) == pytest.approx(ref, rel=2e-13, abs=1e-300)

    def test_monotone_and_normalized(self):
        # Grid stops before float64 saturation so strictness is testable.
        for s in (0.5, 1.5, 2.5, 7.5):
            xs = np.linspace(1e-3, 25.0, 100)
            vals = [lower_incomplete_gamma(s, float(x)) for x in xs]
            ratios = np.array(vals) / math.gamma(s)
            assert np.all(ratios >= 0.0) and np.all(ratios <= 1.0)
            assert np.all(np.diff(vals) > 0.0)

    def test_power_over_s_bound(self):
        # gamma(a, x) < x^a / a on a broad grid
        for a in np.arange(0.5, 10.0, 1.0):
            for x in np.linspace(0.05, 50.0, 120):
                assert lower_incomplete_gamma(float(a), float(x)) < x ** a / a

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            lower_incomplete_gamma(0.0, 1.0)
        with pytest.raises(DomainError):
            lower_incomplete_gamma(1.0, -0.5)

    def test_overflowing_arguments_raise(self):
        with pytest.raises(NumericError):
            lower_incomplete_gamma(200.0, 180.0)

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(5)
        for s in (0.5, 1.5, 4.5, 9.5):
            x = rng.uniform(0.0, 90.0, size=500)
            vec = _lower_incomplete_gamma_vec(s, x)
            ref = np.array([lower_incomplete_gamma(s, float(xi)) for xi in x])
            np.testing.assert_allclose(vec, ref, rtol=1e-13, atol=1e-300)


class TestKummer:
    def test_at_zero(self):
        assert kummer_M(2.7, 1.3, 0.0) == 1.0

    def test_exponential_identity(self):
        for x in (0.2, 1.0, 4.0, 12.0):
            assert kummer_M(1.0, 2.0, x) == pytest.approx(
                (math.exp(x) - 1.0) / x, rel=1e-13)

    def test_below_exponential(self):
        for a in (0.3, 1.0, 2.5, 6.0):
            for x in (0.5, 3.0, 10.0, 20.0):
                assert kummer_M(1.0, 1.0 + a, x) < math.exp(x)

    def test_against_scipy(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            a = float(rng.uniform(-4.0, 6.0))
            b = float(rng.uniform(0.1, 8.0))
            x = float(rng.uniform(0.0, 30.0))
            assert kummer_M(a, b, x) == pytest.approx(
                float(hyp1f1(a, b, x)), rel=5e-12)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            kummer_M(1.0, 0.0, 1.0)
        with pytest.raises(DomainError):
            kummer_M(1.0, -2.0, 1.0)
        with pytest.raises(DomainError):
            kummer_M(1.0, 2.0, -1.0)
