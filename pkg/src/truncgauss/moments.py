"""Conditional moments of the ball-truncated Gaussian and the inequality battery.

All moments are ratios of ball integrals.  Every inequality check carries a
margin and a noise threshold (ten times the propagated quadrature error), so
a genuine violation is distinguishable from roundoff at points where the
quantity being tested is itself tiny.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ball import IntegralValue, MultiIndex, Spectrum, ball_integral
from .errors import DomainError, NumericError
from .report import Report

__all__ = [
    "MomentSet",
    "CorrelationSet",
    "HolderReport",
    "conditional_moments",
    "variance_gap",
    "variance_gap_with_error",
    "correlation_set",
    "marginal_density",
    "holder_report",
    "loose_bound_check",
    "rho_star",
    "inequality_battery",
]

REGION_STRONG = "strong"
REGION_WEAK = "weak"
REGION_CROSSOVER = "crossover"

# An inequality is only flagged when its violation exceeds this multiple of
# the propagated integration error, so quadrature noise near zero crossings
# does not create false findings.
NOISE_FACTOR = 10.0


@dataclass(frozen=True)
class MomentSet:
    """Second and fourth conditional moments plus the full cross matrix."""

    second: tuple[float, ...]           # E[X_n^2 | ball]
    fourth: tuple[float, ...]           # E[X_n^4 | ball]
    cross: tuple[tuple[float, ...], ...]  # E[X_n^2 X_m^2 | ball]

    @property
    def v(self) -> int:
        return len(self.second)

    def variance(self, n: int) -> float:
        return self.fourth[n] - self.second[n] ** 2

    def covariance(self, n: int, m: int) -> float:
        if n == m:
            return self.variance(n)
        return self.cross[n][m] - self.second[n] * self.second[m]


@dataclass(frozen=True)
class CorrelationSet:
    """Scaled correlations of the squared components.

    ``gamma[n][n]`` is var(X_n^2)/rho^2, ``gamma[n][m]`` the matching scaled
    covariance, and ``delta[n]`` the variance-gap combination
    (var(X_n^2) - 2 lambda_n E[X_n^2]) / rho^2 whose sign the library probes.
    """

    gamma: tuple[tuple[float, ...], ...]
    delta: tuple[float, ...]


@dataclass(frozen=True)
class HolderReport:
    h: float
    h1: float  # rho - E[X_n^2], the edge branch
    h2: float  # E[X_n^2], the center branch
    region: str
    bound_holds: bool

    @property
    def dominant_branch(self) -> str:
        """Which candidate realizes the essential supremum.

        Recorded, never assumed: only in the weak region is the edge branch
        provably the larger one.
        """
        return "edge" if self.h1 >= self.h2 else "center"


def _alphas(rho: float, spectrum: Spectrum):
    """Base, single, and pair integrals used by every moment formula."""
    v = spectrum.v
    base = ball_integral(MultiIndex.zero(v), rho, spectrum)
    single = [ball_integral(MultiIndex.single(v, n), rho, spectrum)
              for n in range(v)]
    pair = [[None] * v for _ in range(v)]
    for n in range(v):
        for m in range(n, v):
            idx = MultiIndex.single(v, n, 2) if n == m else \
                MultiIndex.single(v, n).bump(m)
            val = ball_integral(idx, rho, spectrum)
            pair[n][m] = pair[m][n] = val
    return base, single, pair


def conditional_moments(rho: float, spectrum: Spectrum, *,
                        method: str = "quadrature",
                        n_total: int = 1_000_000,
                        seed: int = 0) -> MomentSet:
    """Second/fourth/cross conditional moments as integral ratios.

    The default quadrature route covers v <= 6 and enforces the moment
    bounds strictly.  ``method="mc"`` estimates every ratio from one shared
    sample stream (any dimension); its plug-in estimates carry sampling
    noise, so the bounds are only enforced up to that noise.
    """
    v = spectrum.v
    lams = spectrum.lambdas
    if method == "quadrature":
        base, single, pair = _alphas(rho, spectrum)
        base_v = base.value
        single_v = [s.value for s in single]
        pair_v = [[pair[n][m].value for m in range(v)] for n in range(v)]
        slack = 1e-9
    elif method == "mc":
        from .ball import ball_integral_mc

        def estimate(idx: MultiIndex) -> float:
            return ball_integral_mc(idx, rho, spectrum, n_total, seed).mean

        base_v = estimate(MultiIndex.zero(v))
        single_v = [estimate(MultiIndex.single(v, n)) for n in range(v)]
        pair_v = [[0.0] * v for _ in range(v)]
        for n in range(v):
            for m in range(n, v):
                idx = MultiIndex.single(v, n, 2) if n == m else \
                    MultiIndex.single(v, n).bump(m)
                pair_v[n][m] = pair_v[m][n] = estimate(idx)
        slack = 20.0 / math.sqrt(n_total)
    else:
        raise DomainError(f"unknown moments method {method!r}")

    second = tuple(lams[n] * single_v[n] / base_v for n in range(v))
    fourth = tuple(lams[n] ** 2 * pair_v[n][n] / base_v for n in range(v))
    cross = tuple(
        tuple(lams[n] * lams[m] * pair_v[n][m] / base_v for m in range(v))
        for n in range(v)
    )
    for n in range(v):
        lam = lams[n]
        if not (0.0 < second[n] <= lam * (1.0 + slack) and second[n] < rho):
            raise NumericError(
                f"second moment {second[n]} outside (0, min(lambda, rho)] "
                f"at n={n}, rho={rho}"
            )
        if not (0.0 < fourth[n] <= 3.0 * lam * lam * (1.0 + slack)
                and fourth[n] < rho * rho):
            raise NumericError(
                f"fourth moment {fourth[n]} outside its bounds at n={n}, rho={rho}"
            )
    return MomentSet(second, fourth, cross)


def _ratio_rel_error(num: IntegralValue, den: IntegralValue) -> float:
    return num.rel_error + den.rel_error


def variance_gap_with_error(n: int, rho: float, spectrum: Spectrum) -> tuple[float, float]:
    """The scaled gap (var(X_n^2) - 2 lambda_n E[X_n^2]) / rho^2 and its
    propagated quadrature error."""
    v = spectrum.v
    if not 0 <= n < v:
        raise DomainError(f"dimension {n} out of range for v={v}")
    base = ball_integral(MultiIndex.zero(v), rho, spectrum)
    a1 = ball_integral(MultiIndex.single(v, n), rho, spectrum)
    a2 = ball_integral(MultiIndex.single(v, n, 2), rho, spectrum)
    lam = spectrum.lambdas[n]
    r2 = a2.value / base.value
    r1 = a1.value / base.value
    pref = lam * lam / (rho * rho)
    value = pref * (r2 - r1 * r1 - 2.0 * r1)
    err = pref * (
        r2 * _ratio_rel_error(a2, base)
        + (r1 * r1 + 2.0 * r1) * 2.0 * _ratio_rel_error(a1, base)
    )
    return value, err


def variance_gap(n: int, rho: float, spectrum: Spectrum) -> float:
    return variance_gap_with_error(n, rho, spectrum)[0]


def correlation_set(rho: float, spectrum: Spectrum) -> CorrelationSet:
    base, single, pair = _alphas(rho, spectrum)
    lams = spectrum.lambdas
    v = spectrum.v
    inv_rho2 = 1.0 / (rho * rho)
    gamma = [[0.0] * v for _ in range(v)]
    delta = [0.0] * v
    for n in range(v):
        rn = single[n].value / base.value
        for m in range(n, v):
            rm = single[m].value / base.value
            rnm = pair[n][m].value / base.value
            val = lams[n] * lams[m] * inv_rho2 * (rnm - rn * rm)
            gamma[n][m] = gamma[m][n] = val
        delta[n] = gamma[n][n] - 2.0 * lams[n] * inv_rho2 * (lams[n] * rn)
    return CorrelationSet(tuple(tuple(row) for row in gamma), tuple(delta))


def marginal_density(n: int, x: float, rho: float, spectrum: Spectrum) -> float:
    """Density of the n-th coordinate under the ball-conditioned law.

    Zero outside (-sqrt(rho), sqrt(rho)); the interior value is the reduced
    ball mass at the leftover square radius times the Gaussian factor.
    """
    v = spectrum.v
    if not 0 <= n < v:
        raise DomainError(f"dimension {n} out of range for v={v}")
    rho = float(rho)
    if x * x >= rho:
        return 0.0
    lam = spectrum.lambdas[n]
    gauss = math.exp(-x * x / (2.0 * lam)) / math.sqrt(2.0 * math.pi * lam)
    total = ball_integral(MultiIndex.zero(v), rho, spectrum).value
    if v == 1:
        return gauss / total
    reduced = spectrum.drop(n)
    rest = ball_integral(MultiIndex.zero(v - 1), rho - x * x, reduced).value
    return rest * gauss / total


def holder_report(n: int, rho: float, spectrum: Spectrum) -> HolderReport:
    """Essential-supremum bound on var(X_n^2), with the truncation regime."""
    moments = conditional_moments(rho, spectrum)
    e2 = moments.second[n]
    lam = spectrum.lambdas[n]
    h1 = rho - e2
    h2 = e2
    h = max(h1, h2)
    if rho <= lam:
        region = REGION_STRONG
    elif rho > 2.0 * lam:
        region = REGION_WEAK
    else:
        region = REGION_CROSSOVER
    bound_holds = moments.variance(n) <= 2.0 * h * e2 * (1.0 + 1e-12)
    return HolderReport(h, h1, h2, region, bound_holds)


def loose_bound_check(n: int, rho: float, spectrum: Spectrum) -> bool:
    """E[X_n^4] <= lambda_n (2 lambda_n + E[X_n^2]), valid at every radius."""
    moments = conditional_moments(rho, spectrum)
    lam = spectrum.lambdas[n]
    return moments.fourth[n] <= lam * (2.0 * lam + moments.second[n]) * (1.0 + 1e-12)


def _second_moment(n: int, rho: float, spectrum: Spectrum) -> float:
    v = spectrum.v
    base = ball_integral(MultiIndex.zero(v), rho, spectrum)
    a1 = ball_integral(MultiIndex.single(v, n), rho, spectrum)
    return spectrum.lambdas[n] * a1.value / base.value


def rho_star(n: int, spectrum: Spectrum, tol: float = 1e-10) -> float:
    """Radius solving rho = 2(lambda_n + E[X_n^2 | ball of that radius]).

    Damped fixed-point iteration; the solution sits in (2 lambda_n,
    4 lambda_n].  Only below this radius does the essential-supremum
    argument keep the variance bound tight.
    """
    if tol <= 0.0:
        raise DomainError(f"tol must be positive, got {tol}")
    lam = spectrum.lambdas[n]
    rho = 3.0 * lam
    damping = 0.5
    for _ in range(200):
        target = 2.0 * (lam + _second_moment(n, rho, spectrum))
        if abs(rho - target) < tol:
            return rho
        rho = (1.0 - damping) * rho + damping * target
    raise NumericError(
        f"fixed-point iteration for the crossover radius did not reach "
        f"tol={tol} in 200 steps (n={n}, last rho={rho})"
    )


def inequality_battery(rho: float, spectrum: Spectrum) -> Report:
    """Every inequality the moment structure must (or is claimed to) satisfy.

    Proved facts are assert-class; the sign conjectures on the variance gap,
    the covariances, and diagonal dominance are claim-class findings.
    """
    report = Report("inequalities")
    base, single, pair = _alphas(rho, spectrum)
    lams = spectrum.lambdas
    v = spectrum.v

    second, fourth = [], []
    sec_err, frt_err = [], []
    for n in range(v):
        r1 = single[n].value / base.value
        r2 = pair[n][n].value / base.value
        second.append(lams[n] * r1)
        fourth.append(lams[n] ** 2 * r2)
        sec_err.append(lams[n] * r1 * _ratio_rel_error(single[n], base))
        frt_err.append(lams[n] ** 2 * r2 * _ratio_rel_error(pair[n][n], base))

    cov = [[0.0] * v for _ in range(v)]
    cov_err = [[0.0] * v for _ in range(v)]
    for n in range(v):
        for m in range(v):
            rnm = pair[n][m].value / base.value
            rn = single[n].value / base.value
            rm = single[m].value / base.value
            cov[n][m] = lams[n] * lams[m] * (rnm - rn * rm)
            cov_err[n][m] = lams[n] * lams[m] * (
                rnm * _ratio_rel_error(pair[n][m], base)
                + rn * rm * (_ratio_rel_error(single[n], base)
                             + _ratio_rel_error(single[m], base))
            )

    var = [fourth[n] - second[n] ** 2 for n in range(v)]
    var_err = [frt_err[n] + 2.0 * second[n] * sec_err[n] for n in range(v)]

    # Log-concavity consequence: scaled variances minus 2v plus scaled
    # cross-covariances stays nonpositive.
    combo = sum(var[n] / lams[n] ** 2 for n in range(v)) - 2.0 * v
    combo += sum(cov[n][m] / (lams[n] * lams[m])
                 for n in range(v) for m in range(v) if m != n)
    combo_err = sum(var_err[n] / lams[n] ** 2 for n in range(v))
    combo_err += sum(cov_err[n][m] / (lams[n] * lams[m])
                     for n in range(v) for m in range(v) if m != n)
    report.add("log-concavity-combination", combo <= NOISE_FACTOR * combo_err,
               -combo, detail=f"value {combo:.6e}, noise {combo_err:.1e}")

    # Trace bound on the scaled second moments.
    trace = sum(second[n] / lams[n] for n in range(v))
    trace_err = sum(sec_err[n] / lams[n] for n in range(v))
    report.add("second-moment-trace", trace <= v + NOISE_FACTOR * trace_err,
               v - trace, detail=f"sum {trace:.12f} vs v={v}")

    for n in range(v):
        lam = lams[n]
        noise = NOISE_FACTOR * (frt_err[n] + 3.0 * lam * sec_err[n])

        # Chain of fourth-moment bounds, loosest last; each step must not tighten.
        b1 = second[n] * (2.0 * lam + second[n])
        b2 = lam * (2.0 * lam + second[n])
        b3 = 3.0 * lam * lam
        report.add(f"chain-monotone[{n}]",
                   b1 <= b2 + noise and b2 <= b3 + noise,
                   min(b2 - b1, b3 - b2))
        report.add(f"fourth-vs-tight[{n}]", fourth[n] <= b1 + noise,
                   b1 - fourth[n], claim=True,
                   detail="equivalent to the nonpositive variance gap")
        report.add(f"fourth-vs-loose[{n}]", fourth[n] <= b2 + noise,
                   b2 - fourth[n])
        report.add(f"fourth-vs-free[{n}]", fourth[n] <= b3 + noise,
                   b3 - fourth[n])

        gap = (var[n] - 2.0 * lam * second[n]) / (rho * rho)
        gap_err = (var_err[n] + 2.0 * lam * sec_err[n]) / (rho * rho)
        report.add(f"variance-gap[{n}]", gap <= NOISE_FACTOR * gap_err, -gap,
                   claim=True, detail=f"gap {gap:.6e}, noise {gap_err:.1e}")

        row = sum(abs(cov[n][m]) for m in range(v) if m != n)
        row_err = sum(cov_err[n][m] for m in range(v) if m != n)
        report.add(f"diagonal-dominance[{n}]",
                   var[n] >= row - NOISE_FACTOR * (var_err[n] + row_err),
                   var[n] - row, claim=True)

        for m in range(n + 1, v):
            report.add(f"negative-covariance[{n},{m}]",
                       cov[n][m] <= NOISE_FACTOR * cov_err[n][m],
                       -cov[n][m], claim=True,
                       detail=f"cov {cov[n][m]:.6e}, noise {cov_err[n][m]:.1e}")

    return report
