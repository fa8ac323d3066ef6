"""Partial sums of the large-radius expansion and its convergence-rate machinery.

Each expansion order factorizes into one-dimensional integrals along the
sliced direction(s) times a reduced-dimension coefficient function, with
power counting carried by (lambda_n / rho)^q.  The convergence-rate
estimate prices the p-th term by maximizing the relevant polynomial-times-
exponential profile over the positive axis, then fits the decay to a power
law; the fitted pair (amplitude, exponent) is the reproducible summary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ball import MultiIndex, Spectrum, ball_integral, ball_integral_1d
from .errors import DomainError, NumericError
from .eta import eta_combinatorial
from .report import Report
from .special import raising_factorial

__all__ = [
    "ExpansionPartialSum",
    "ConvergenceEstimate",
    "q_polynomial",
    "expand_alpha",
    "gamma_nn_expansion_coeff",
    "gamma_nm_cancellation_check",
    "convergence_estimate",
]

_MAX_ORDER = 4

TARGET_ALPHA = "alpha"
TARGET_SINGLE = "alpha_nk"
TARGET_PAIR = "alpha_nm"


@dataclass(frozen=True)
class ExpansionPartialSum:
    target: str
    order: int
    value: float
    terms: tuple[float, ...]


@dataclass(frozen=True)
class ConvergenceEstimate:
    v: int
    p_values: tuple[int, ...]
    c_values: tuple[float, ...]
    fit_A: float
    fit_eps: float
    fit_chi2: float


def q_polynomial(k: int, x: float, a: float) -> float:
    """Binomial-type polynomial with raising-factorial coefficients.

    Degree k in x with unit leading coefficient; the l-th coefficient is
    C(k, l) times the l-th raising factorial of a.
    """
    if k < 0:
        raise DomainError(f"degree must be >= 0, got {k}")
    return float(sum(
        math.comb(k, ell) * raising_factorial(a, ell) * x ** (k - ell)
        for ell in range(k + 1)
    ))


def _eta_reduced(q: int, rho: float, reduced: Spectrum | None) -> float:
    """Coefficient function of the reduced spectrum; trivial when empty."""
    if reduced is None:
        return 1.0 if q == 0 else 0.0
    return eta_combinatorial(q, rho, reduced)


def _reduced_mass(rho: float, reduced: Spectrum | None) -> float:
    if reduced is None:
        return 1.0
    return ball_integral(MultiIndex.zero(reduced.v), rho, reduced).value


def expand_alpha(target: str, n: int, order: int, rho: float,
                 spectrum: Spectrum, *, k: int = 0,
                 m: int | None = None) -> ExpansionPartialSum:
    """Partial sum of the sliced expansion up to the given order.

    ``target`` selects the integral: the plain mass ("alpha"), the k-fold
    single-index integral ("alpha_nk", multiplicity via ``k``), or the
    two-index pair integral ("alpha_nm", second dimension via ``m``).
    The returned terms list carries one contribution per order.
    """
    if order < 0 or order > _MAX_ORDER:
        raise DomainError(f"order must be in [0, {_MAX_ORDER}], got {order}")
    v = spectrum.v
    if not 0 <= n < v:
        raise DomainError(f"dimension {n} out of range for v={v}")
    lam_n = spectrum.lambdas[n]

    if target in (TARGET_ALPHA, TARGET_SINGLE):
        base_k = 0 if target == TARGET_ALPHA else int(k)
        if base_k < 0:
            raise DomainError(f"multiplicity must be >= 0, got {base_k}")
        reduced = spectrum.drop(n) if v >= 2 else None
        rest = _reduced_mass(rho, reduced)
        terms = []
        for q in range(order + 1):
            one_dim = ball_integral_1d(base_k + q, rho, lam_n).value
            terms.append(
                (-1.0) ** q / math.factorial(q) * (lam_n / rho) ** q
                * one_dim * rest * _eta_reduced(q, rho, reduced)
            )
    elif target == TARGET_PAIR:
        if m is None or m == n or not 0 <= m < v:
            raise DomainError(
                f"pair target needs a second dimension distinct from {n}, got {m}"
            )
        if v < 2:
            raise DomainError("pair target needs v >= 2")
        lam_m = spectrum.lambdas[m]
        reduced = None
        if v > 2:
            reduced = spectrum.drop(max(n, m)).drop(min(n, m))
        rest = _reduced_mass(rho, reduced)
        terms = []
        for j in range(order + 1):
            inner = 0.0
            for a in range(j + 1):
                b = j - a
                inner += (
                    math.comb(j, a)
                    * (lam_n / rho) ** a * (lam_m / rho) ** b
                    * ball_integral_1d(1 + a, rho, lam_n).value
                    * ball_integral_1d(1 + b, rho, lam_m).value
                )
            terms.append(
                (-1.0) ** j / math.factorial(j) * inner * rest
                * _eta_reduced(j, rho, reduced)
            )
    else:
        raise DomainError(f"unknown expansion target {target!r}")

    return ExpansionPartialSum(target, order, float(sum(terms)), tuple(terms))


def gamma_nn_expansion_coeff(rho_limit: bool, n: int, rho: float,
                             spectrum: Spectrum) -> float:
    """Bracketed first-order coefficient of the scaled-variance expansion.

    The bracket combines three one-dimensional integral ratios along
    dimension n; at infinite radius the ratios reach their semifactorial
    limits and the bracket equals 15 - 9 + 2 = 8.
    """
    if rho_limit:
        return 8.0
    lam = spectrum.lambdas[n]
    base = ball_integral_1d(0, rho, lam).value
    r1 = ball_integral_1d(1, rho, lam).value / base
    r2 = ball_integral_1d(2, rho, lam).value / base
    r3 = ball_integral_1d(3, rho, lam).value / base
    return r3 - 3.0 * r2 * r1 + 2.0 * r1 ** 3


def gamma_nm_cancellation_check(n: int, m: int, rho: float,
                                spectrum: Spectrum) -> Report:
    """Term-by-term cancellation in the scaled-covariance expansion.

    The two ratio expansions entering the covariance share their zeroth-
    and first-order terms exactly, so the covariance itself is smaller than
    either series' first-order term by at least one more power of
    lambda / rho (with an exponentially small remainder on top).
    """
    if n == m:
        raise DomainError("cancellation check needs two distinct dimensions")
    v = spectrum.v
    if v < 2:
        raise DomainError("needs v >= 2")
    report = Report("covariance-cancellation")
    lam_n, lam_m = spectrum.lambdas[n], spectrum.lambdas[m]

    base_n = ball_integral_1d(0, rho, lam_n).value
    base_m = ball_integral_1d(0, rho, lam_m).value
    rn1 = ball_integral_1d(1, rho, lam_n).value / base_n
    rn2 = ball_integral_1d(2, rho, lam_n).value / base_n
    rm1 = ball_integral_1d(1, rho, lam_m).value / base_m
    rm2 = ball_integral_1d(2, rho, lam_m).value / base_m

    reduced = None
    if v > 2:
        reduced = spectrum.drop(max(n, m)).drop(min(n, m))
    eta1 = _eta_reduced(1, rho, reduced)

    # Ratio expansion of the pair integral over the mass.
    route_a0 = rn1 * rm1
    route_a1 = (
        -(lam_n / rho) * (rn2 / rn1 - rn1) * rn1 * rm1 * eta1
        - (lam_m / rho) * (rm2 / rm1 - rm1) * rn1 * rm1 * eta1
    )
    # Ratio expansion of the product of single integrals over the mass squared.
    route_b0 = rn1 * rm1
    route_b1 = (
        -(lam_n / rho) * (rn2 / rn1) * rn1 * rm1 * eta1
        - (lam_m / rho) * (rm2 / rm1) * rn1 * rm1 * eta1
        + (lam_n / rho) * rn1 * rn1 * rm1 * eta1
        + (lam_m / rho) * rm1 * rn1 * rm1 * eta1
    )

    scale0 = abs(route_a0)
    diff0 = abs(route_a0 - route_b0)
    report.add("order-0-cancellation", diff0 <= 1e-14 * scale0, scale0 - diff0,
               detail=f"difference {diff0:.3e}")
    scale1 = max(abs(route_a1), abs(route_b1), 1e-300)
    diff1 = abs(route_a1 - route_b1)
    report.add("order-1-cancellation", diff1 <= 1e-12 * scale1, scale1 - diff1,
               detail=f"difference {diff1:.3e} vs term size {scale1:.3e}")

    zero = MultiIndex.zero(v)
    pair_idx = MultiIndex.single(v, n).bump(m)
    base = ball_integral(zero, rho, spectrum)
    an = ball_integral(MultiIndex.single(v, n), rho, spectrum)
    am = ball_integral(MultiIndex.single(v, m), rho, spectrum)
    anm = ball_integral(pair_idx, rho, spectrum)
    gamma_nm = (lam_n * lam_m / rho ** 2) * (
        anm.value / base.value - (an.value / base.value) * (am.value / base.value)
    )
    envelope = (lam_n * lam_m / rho ** 2) * (spectrum.lambda_max / rho)
    report.add("covariance-below-first-order", abs(gamma_nm) < envelope,
               envelope - abs(gamma_nm),
               detail=f"|cov|/rho^2 = {abs(gamma_nm):.3e} vs envelope {envelope:.3e}")
    return report


# ---------------------------------------------------------------------------
# Convergence-rate estimate
# ---------------------------------------------------------------------------

def _term_profile_log(p: int, phi_star: float, log_x: np.ndarray) -> np.ndarray:
    """log of |sum_l r_l x^(p-l+phi*) / (l! (p-1-l)!)| - x on a log-x grid.

    This is the p-th term envelope: the degree-(p-1) binomial-type
    polynomial over (p-1)!, carrying the x^((v-1)/2) prefactor of the
    reduced-dimension derivative bound (hence the +phi* in the exponent,
    with phi* = (v-3)/2, r_l the l-th raising factorial of -phi*).
    """
    signs = np.empty(p)
    logabs = np.empty(p)
    sign, mag = 1.0, 0.0
    alive = True
    for ell in range(p):
        if alive and ell > 0:
            factor = -phi_star + (ell - 1)
            if factor == 0.0:
                alive = False
            else:
                sign *= math.copysign(1.0, factor)
                mag += math.log(abs(factor))
        if alive:
            signs[ell] = sign
            logabs[ell] = mag - math.lgamma(ell + 1) - math.lgamma(p - ell)
        else:
            signs[ell] = 0.0
            logabs[ell] = -np.inf
    powers = p - np.arange(p) + phi_star
    log_terms = logabs[None, :] + np.outer(log_x, powers)
    peak = np.max(log_terms, axis=1)
    balanced = np.einsum(
        "ij,j->i", np.exp(log_terms - peak[:, None]), signs
    )
    x = np.exp(log_x)
    with np.errstate(divide="ignore"):
        return peak + np.log(np.abs(balanced)) - x


def _c_value(v: int, p: int) -> float:
    """Max over positive x of the p-th term profile, divided by p."""
    phi_star = (v - 3) / 2.0
    grid = np.linspace(math.log(1e-3), math.log(1e3), 400)
    profile = _term_profile_log(p, phi_star, grid)
    i = int(np.argmax(profile))
    if i == 0 or i == len(grid) - 1:
        raise NumericError(
            f"maximizer bracket failure for the term profile at v={v}, p={p}"
        )
    lo, hi = grid[i - 1], grid[i + 1]

    def f(log_x: float) -> float:
        return float(_term_profile_log(p, phi_star, np.array([log_x]))[0])

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c1 = b - invphi * (b - a)
    c2 = a + invphi * (b - a)
    f1, f2 = f(c1), f(c2)
    while abs(b - a) > 1e-10 * max(abs(a), abs(b), 1.0):
        if f1 < f2:
            a, c1, f1 = c1, c2, f2
            c2 = a + invphi * (b - a)
            f2 = f(c2)
        else:
            b, c2, f2 = c2, c1, f1
            c1 = b - invphi * (b - a)
            f1 = f(c1)
    # One parabolic polish through the final bracket.
    xs = np.array([a, (a + b) / 2.0, b])
    ys = np.array([f(xs[0]), f(xs[1]), f(xs[2])])
    denom = (xs[0] - xs[1]) * (xs[0] - xs[2]) * (xs[1] - xs[2])
    if denom != 0.0:
        aa = (xs[2] * (ys[1] - ys[0]) + xs[1] * (ys[0] - ys[2])
              + xs[0] * (ys[2] - ys[1])) / denom
        bb = (xs[2] ** 2 * (ys[0] - ys[1]) + xs[1] ** 2 * (ys[2] - ys[0])
              + xs[0] ** 2 * (ys[1] - ys[2])) / denom
        if aa < 0.0:
            vertex = -bb / (2.0 * aa)
            if xs[0] <= vertex <= xs[2]:
                ys = np.append(ys, f(vertex))
    return math.exp(float(np.max(ys))) / p


def convergence_estimate(v: int, p_min: int, p_max: int) -> ConvergenceEstimate:
    """Power-law fit of the term-size estimate over [p_min, p_max].

    A decaying fit (positive exponent) signals a convergent expansion for
    that dimension; the estimate turns increasing at v = 6.
    """
    if not 2 <= v <= 6:
        raise DomainError(f"estimate defined for 2 <= v <= 6, got {v}")
    if not 1 <= p_min < p_max <= 200:
        raise DomainError(f"need 1 <= p_min < p_max <= 200, got [{p_min}, {p_max}]")
    p_values = tuple(range(p_min, p_max + 1))
    c_values = tuple(_c_value(v, p) for p in p_values)
    log_p = np.log(p_values)
    log_c = np.log(c_values)
    slope, intercept = np.polyfit(log_p, log_c, 1)
    resid = log_c - (slope * log_p + intercept)
    chi2 = float(resid @ resid) / max(len(p_values) - 2, 1)
    return ConvergenceEstimate(
        v, p_values, c_values, float(math.exp(intercept)), float(-slope), chi2
    )
