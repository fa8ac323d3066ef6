"""Coefficient functions of the large-radius expansion.

The k-th coefficient function is the ratio rho^k (d/drho)^k alpha / alpha
of the ball mass.  It admits an exact combinatorial reduction to a linear
combination of ball integrals, with rational weights built from Stirling
numbers and semifactorial ratios; that reduction is the production route.
A finite-difference evaluation of the defining ratio serves as its
independent oracle, and the asymptotic report checks the vanishing, the
limiting sign pattern, and the exponential envelope at large radius.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

from .ball import MultiIndex, Spectrum, ball_integral
from .errors import CapabilityError, DomainError
from .report import Report
from .special import stirling_second

__all__ = [
    "CoefficientTable",
    "coefficient_table",
    "eta_combinatorial",
    "eta_fd_oracle",
    "asymptotic_checks",
]

_K_MAX_TABLE = 32
_K_MAX_COMBINATORIAL = 6
_K_MAX_FD = 4


@dataclass(frozen=True)
class CoefficientTable:
    """Exact rational tables for dimension v up to order k_max.

    ``d[k][l]`` expands the k-fold scaled radial derivative
    (rho d/drho)^k alpha over the index-summed integrals x_l;
    ``c[k][l]`` does the same for rho^k (d/drho)^k alpha / alpha, and
    ``phi[k]`` is the semifactorial quotient v!! / (v - 2k)!! extended by
    its product recurrence when the quotient form is undefined.
    """

    v: int
    d: tuple[tuple[Fraction, ...], ...]
    c: tuple[tuple[Fraction, ...], ...]
    phi: tuple[int, ...]


@functools.lru_cache(maxsize=256)
def coefficient_table(v: int, k_max: int) -> CoefficientTable:
    if v < 1:
        raise DomainError(f"dimension must be >= 1, got {v}")
    if not 0 <= k_max <= _K_MAX_TABLE:
        raise DomainError(f"k_max must be in [0, {_K_MAX_TABLE}], got {k_max}")
    phi = [1]
    for k in range(1, k_max + 1):
        phi.append((v - 2 * k + 2) * phi[k - 1])

    d = [[Fraction(0)] * (k_max + 1) for _ in range(k_max + 1)]
    c = [[Fraction(0)] * (k_max + 1) for _ in range(k_max + 1)]
    d[0][0] = Fraction(1)
    c[0][0] = Fraction(1)
    for k in range(1, k_max + 1):
        for ell in range(k + 1):
            d[k][ell] = sum(
                Fraction((-1) ** ell * phi[t - ell] * stirling_second(k, t)
                         * math.comb(t, ell), 2 ** t)
                for t in range(ell, k + 1)
            )
            c[k][ell] = Fraction((-1) ** ell * phi[k - ell] * math.comb(k, ell),
                                 2 ** k)
    return CoefficientTable(
        v,
        tuple(tuple(row) for row in d),
        tuple(tuple(row) for row in c),
        tuple(phi),
    )


def _compositions(total: int, parts: int):
    """All ordered splits of `total` into `parts` nonnegative summands."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def index_sum_ratio(ell: int, rho: float, spectrum: Spectrum) -> float:
    """Sum over all ell-fold index insertions of the integral ratio.

    Equal multiplicity patterns are grouped, each weighted by the count of
    index orderings that produce it, so the cost is one quadrature per
    distinct pattern instead of v^ell.
    """
    if ell == 0:
        return 1.0
    v = spectrum.v
    base = ball_integral(MultiIndex.zero(v), rho, spectrum).value
    total = 0.0
    fact_ell = math.factorial(ell)
    for combo in _compositions(ell, v):
        weight = fact_ell
        for m in combo:
            weight //= math.factorial(m)
        total += weight * ball_integral(MultiIndex(combo), rho, spectrum).value
    return total / base


def eta_combinatorial(k: int, rho: float, spectrum: Spectrum) -> float:
    """The k-th coefficient function through the exact reduction."""
    if k < 0:
        raise DomainError(f"order must be >= 0, got {k}")
    if k == 0:
        return 1.0
    if k > _K_MAX_COMBINATORIAL:
        raise CapabilityError(
            f"combinatorial route supports k <= {_K_MAX_COMBINATORIAL} "
            f"(cost grows with compositions), got {k}"
        )
    table = coefficient_table(spectrum.v, k)
    return float(sum(
        float(table.c[k][ell]) * index_sum_ratio(ell, rho, spectrum)
        for ell in range(k + 1)
    ))


def _central_kth(f, x: float, k: int, h: float) -> float:
    """Central k-th difference at half-integer offsets, error O(h^2)."""
    total = 0.0
    for j in range(k + 1):
        total += (-1) ** j * math.comb(k, j) * f(x + (k / 2.0 - j) * h)
    return total / h ** k


def eta_fd_oracle(k: int, rho: float, spectrum: Spectrum) -> float:
    """Finite-difference oracle for the k-th coefficient function.

    Step rho * 10^(-2/k), one Richardson extrapolation; independent of the
    combinatorial route (it only ever evaluates the plain ball mass).
    """
    if k < 0:
        raise DomainError(f"order must be >= 0, got {k}")
    if k == 0:
        return 1.0
    if k > _K_MAX_FD:
        raise DomainError(f"finite differences support k <= {_K_MAX_FD}, got {k}")
    v = spectrum.v
    zero = MultiIndex.zero(v)

    def alpha(r: float) -> float:
        return ball_integral(zero, r, spectrum).value

    h = rho * 10.0 ** (-2.0 / k)
    if h == 0.0 or rho - (k / 2.0) * h <= 0.0:
        raise DomainError(f"step {h} leaves the domain at rho={rho}")
    coarse = _central_kth(alpha, rho, k, h)
    fine = _central_kth(alpha, rho, k, h / 2.0)
    deriv = (4.0 * fine - coarse) / 3.0
    return rho ** k * deriv / alpha(rho)


def radial_derivative_envelope(k: int, rho: float, spectrum: Spectrum) -> float:
    """Upper bound on |rho^k (d/drho)^k alpha| at large radius.

    Exact for k = 1; for k >= 2 the angular average of the degree-(k-1)
    polynomial factor is bounded by its maximum over the attainable range
    of the quadratic form, which keeps the bound valid without any
    integration over the sphere.
    """
    v = spectrum.v
    det_sqrt = math.sqrt(math.prod(spectrum.lambdas))
    pref = rho ** (v / 2.0) / (2.0 ** (v / 2.0) * math.gamma(v / 2.0) * det_sqrt)
    if k == 1:
        poly_max = 1.0
    else:
        from .expansion import q_polynomial

        a = -(v / 2.0 - 1.0)
        lo = rho / (2.0 * spectrum.lambda_max)
        hi = rho / (2.0 * spectrum.lambda_min)
        grid = [lo + (hi - lo) * i / 256.0 for i in range(257)]
        poly_max = max(abs(q_polynomial(k - 1, x, a)) for x in grid)
    return pref * poly_max * math.exp(-rho / (2.0 * spectrum.lambda_max))


def asymptotic_checks(v: int, spectrum: Spectrum, k_max: int,
                      rho_schedule: tuple[float, ...]) -> Report:
    """Vanishing, limiting signs, and exponential envelope along a schedule."""
    if v != spectrum.v:
        raise DomainError(f"v={v} does not match spectrum dimension {spectrum.v}")
    schedule = tuple(float(r) for r in rho_schedule)
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise DomainError("rho schedule must be strictly increasing")
    report = Report("asymptotic")
    zero = MultiIndex.zero(v)
    for k in range(1, k_max + 1):
        values = [eta_combinatorial(k, r, spectrum) for r in schedule]
        tail = values[-3:] if len(values) >= 3 else values
        decreasing = all(abs(b) < abs(a) for a, b in zip(tail, tail[1:]))
        report.add(f"vanishing[k={k}]", decreasing,
                   abs(tail[0]) - abs(tail[-1]),
                   detail=f"|eta_{k}| along tail: "
                          + ", ".join(f"{abs(x):.3e}" for x in tail))
        want = (-1.0) ** (k - 1)
        sign_ok = all(math.copysign(1.0, x) == want for x in values[-2:])
        report.add(f"limit-sign[k={k}]", sign_ok, want * values[-1],
                   detail=f"expected sign {int(want)}")
        for rho in schedule[-2:]:
            alpha = ball_integral(zero, rho, spectrum).value
            lhs = abs(eta_combinatorial(k, rho, spectrum)) * alpha
            env = radial_derivative_envelope(k, rho, spectrum)
            report.add(f"envelope[k={k},rho={rho:g}]", lhs < env, env - lhs,
                       detail=f"|rho^k d^k alpha| {lhs:.3e} < bound {env:.3e}")
    return report
