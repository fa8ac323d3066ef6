"""Partial sums, the binomial-raising polynomial, and the convergence estimate."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from truncgauss.ball import MultiIndex, Spectrum, ball_integral, ball_integral_1d
from truncgauss.errors import DomainError
from truncgauss.expansion import (
    convergence_estimate,
    expand_alpha,
    gamma_nm_cancellation_check,
    gamma_nn_expansion_coeff,
    q_polynomial,
)
from truncgauss.eta import eta_combinatorial
from truncgauss.moments import correlation_set


class TestQPolynomial:
    def test_degree_zero(self):
        assert q_polynomial(0, 3.7, -1.2) == 1.0

    def test_degree_one(self):
        for x, a in [(0.5, 2.0), (3.0, -0.5)]:
            assert q_polynomial(1, x, a) == pytest.approx(x + a)

    def test_degree_two(self):
        for x, a in [(0.5, 2.0), (1.5, -0.25), (4.0, 0.0)]:
            assert q_polynomial(2, x, a) == pytest.approx(
                x * x + 2 * a * x + a * (a + 1.0))

    @given(st.integers(min_value=0, max_value=8),
           st.floats(min_value=-3.0, max_value=3.0, allow_nan=False))
    @settings(max_examples=40)
    def test_unit_leading_coefficient(self, k, a):
        # at large x the polynomial is dominated by x^k with coefficient one
        big = 1e8
        assert q_polynomial(k, big, a) == pytest.approx(big ** k, rel=1e-5)


SPEC2 = Spectrum((1.0, 4.0))


class TestExpandAlpha:
    def test_order_zero_factorizes(self):
        rho = 7.0
        part = expand_alpha("alpha_nk", 0, 0, rho, SPEC2, k=2)
        expected = (ball_integral_1d(2, rho, 1.0).value
                    * ball_integral_1d(0, rho, 4.0).value)
        assert part.value == pytest.approx(expected, rel=1e-13)
        assert part.terms == (part.value,)

    def test_term_prefactor_structure(self):
        rho = 9.0
        part = expand_alpha("alpha", 0, 2, rho, SPEC2)
        reduced = Spectrum((4.0,))
        rest = ball_integral_1d(0, rho, 4.0).value
        expected_t2 = (0.5 / rho ** 2
                       * ball_integral_1d(2, rho, 1.0).value * rest
                       * eta_combinatorial(2, rho, reduced))
        assert part.terms[2] == pytest.approx(expected_t2, rel=1e-12)

    def test_higher_order_tightens(self):
        rho = 40.0
        exact = ball_integral(MultiIndex((0, 0)), rho, SPEC2).value
        p0 = expand_alpha("alpha", 0, 0, rho, SPEC2)
        p2 = expand_alpha("alpha", 0, 2, rho, SPEC2)
        assert abs(p2.value - exact) < abs(p0.value - exact)

    def test_residual_order_scaling(self):
        # relative residual of the order-P sum falls like the (P+1)-th power
        # of the inverse radius; the second variance is huge so the reduced
        # factors stay flat across the schedule
        spec = Spectrum((1.0, 2000.0))
        rhos = (20.0, 40.0, 80.0)
        for order in (0, 1, 2):
            resid = []
            for rho in rhos:
                exact = ball_integral(MultiIndex((0, 0)), rho, spec).value
                part = expand_alpha("alpha", 0, order, rho, spec)
                resid.append(abs(part.value - exact) / exact)
            slope = -np.polyfit(np.log(rhos), np.log(resid), 1)[0]
            assert order + 0.7 <= slope <= order + 1.3, (
                f"order {order}: slope {slope}")

    def test_error_sign_matches_first_omitted_term(self):
        # every correction term is negative at large radius (the alternating
        # prefactor and the alternating coefficient-function signs cancel),
        # so partial sums approach from above and each error carries the
        # sign of the first omitted term
        rho = 60.0
        exact = ball_integral(MultiIndex((0, 0)), rho, SPEC2).value
        for order in (0, 1):
            sums = expand_alpha("alpha", 0, order + 1, rho, SPEC2)
            first_omitted = sums.terms[order + 1]
            err = exact - sum(sums.terms[: order + 1])
            assert math.copysign(1.0, err) == math.copysign(1.0, first_omitted)
        s0 = expand_alpha("alpha", 0, 0, rho, SPEC2).value
        s1 = expand_alpha("alpha", 0, 1, rho, SPEC2).value
        assert abs(s1 - exact) < abs(s0 - exact)

    def test_pair_expansion_consistency(self):
        # two-direction split converges to the pair integral
        spec = Spectrum((1.0, 2.0, 3.0))
        rho = 60.0
        exact = ball_integral(MultiIndex((1, 1, 0)), rho, spec).value
        errs = [abs(expand_alpha("alpha_nm", 0, order, rho, spec, m=1).value
                    - exact) for order in (0, 1, 2)]
        assert errs[2] < errs[1] < errs[0]
        assert errs[2] / exact < 1e-3

    def test_pair_two_dimensional_reduced_is_trivial(self):
        # with v = 2 the reduced spectrum is empty: order-zero term only
        spec = Spectrum((1.0, 2.0))
        rho = 12.0
        part = expand_alpha("alpha_nm", 0, 2, rho, spec, m=1)
        assert part.terms[1] == 0.0 and part.terms[2] == 0.0
        expected = (ball_integral_1d(1, rho, 1.0).value
                    * ball_integral_1d(1, rho, 2.0).value)
        assert part.value == pytest.approx(expected, rel=1e-13)

    def test_argument_validation(self):
        with pytest.raises(DomainError):
            expand_alpha("alpha", 0, 5, 1.0, SPEC2)
        with pytest.raises(DomainError):
            expand_alpha("alpha_nm", 0, 1, 1.0, SPEC2, m=0)
        with pytest.raises(DomainError):
            expand_alpha("nonsense", 0, 1, 1.0, SPEC2)


class TestGammaNNCoefficient:
    def test_limit_value(self):
        assert gamma_nn_expansion_coeff(True, 0, 1.0, SPEC2) == 8.0

    def test_finite_radius_approaches_limit(self):
        vals = [gamma_nn_expansion_coeff(False, 0, rho, SPEC2)
                for rho in (10.0, 30.0, 90.0)]
        gaps = [abs(v - 8.0) for v in vals]
        assert gaps[2] < gaps[1] < gaps[0]
        assert gaps[2] < 1e-6

    def test_matches_observed_first_order_correction(self):
        # The scaled-variance deficit divided by the expansion's own
        # prefactor recovers the bracket.  The next order contributes a
        # relative remainder proportional to the variance ratio of the
        # sliced to the reduced dimension (the second coefficient function
        # grows linearly in the reduced truncation strength), so the
        # comparison is run along a ladder of doubling reduced variances
        # at fixed shape: the excess must halve each step and die out.
        excesses = []
        for lam2 in (12.0, 24.0, 48.0):
            rho = 4.0 * lam2
            spec = Spectrum((1.0, lam2))
            full = correlation_set(rho, spec).gamma[0][0]
            one = correlation_set(rho, Spectrum((1.0,))).gamma[0][0]
            eta1 = eta_combinatorial(1, rho, spec.drop(0))
            measured = (one - full) / (1.0 / rho ** 3 * eta1)
            bracket = gamma_nn_expansion_coeff(False, 0, rho, spec)
            excesses.append(measured / bracket - 1.0)
        assert abs(excesses[-1]) < 0.1
        for a, b in zip(excesses, excesses[1:]):
            assert abs(b) < 0.6 * abs(a)

    def test_variance_converges_to_one_dimensional(self):
        spec = Spectrum((1.0, 2.0, 3.0))
        gaps = []
        for rho in (6.0, 18.0, 54.0):
            full = correlation_set(rho, spec).gamma[0][0]
            one = correlation_set(rho, Spectrum((1.0,))).gamma[0][0]
            gaps.append(abs(full - one))
        assert gaps[2] < gaps[1] < gaps[0]


class TestCancellationCheck:
    def test_reference_point(self):
        spec = Spectrum((1.0, 2.0, 3.0))
        report = gamma_nm_cancellation_check(0, 1, 30.0, spec)
        assert report.all_ok
        names = [c.name for c in report.checks]
        assert "order-0-cancellation" in names
        assert "covariance-below-first-order" in names

    def test_needs_distinct_dimensions(self):
        with pytest.raises(DomainError):
            gamma_nm_cancellation_check(1, 1, 5.0, Spectrum((1.0, 2.0)))


class TestConvergenceEstimate:
    def test_fit_window_validation(self):
        with pytest.raises(DomainError):
            convergence_estimate(1, 50, 100)
        with pytest.raises(DomainError):
            convergence_estimate(3, 100, 50)

    def test_three_dimensional_closed_form(self):
        # with the middle dimension the profile is a single monomial whose
        # maximum is at x = p, giving C(p) = p^p e^-p / p!
        est = convergence_estimate(3, 20, 30)
        for p, c in zip(est.p_values, est.c_values):
            expected = math.exp(p * math.log(p) - p - math.lgamma(p + 1))
            assert c == pytest.approx(expected, rel=1e-9)

    def test_monotonicity_flip_at_six(self):
        for v, increasing in ((2, False), (5, False), (6, True)):
            est = convergence_estimate(v, 50, 100)
            diffs = np.diff(est.c_values)
            assert np.all(diffs > 0) == increasing
            assert np.all(diffs < 0) == (not increasing)

    def test_positive_values(self):
        est = convergence_estimate(4, 50, 60)
        assert all(c > 0 for c in est.c_values)


class TestOneIndexUpperBound:
    def test_bound_on_grid(self):
        # single-index integrals sit below the power-law envelope
        for k in range(1, 7):
            for ratio in np.linspace(0.5, 50.0, 40):
                lam = 1.3
                rho = ratio * lam
                val = ball_integral_1d(k, rho, lam).value
                bound = (1.0 / (math.sqrt(2.0 * math.pi) * k)
                         * ratio ** (k + 0.5))
                assert val < bound
