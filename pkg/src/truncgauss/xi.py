"""Exact coefficient algebra of the variance-gap expansion at large radius.

Every expansion order q couples to monomials in the coefficient functions,
indexed by exponent vectors e = (e_0, ..., e_q) whose weighted tail sum
(the power count) must equal q.  This module enumerates those vectors,
convolves coefficient maps of products, and evaluates the infinite-radius
limits in exact rational arithmetic, culminating in the sign law for the
variance-gap coefficients: each limit is 4 (-1)^(sum e) [semifactorial
weights] (Omega0 - Omega1), and Omega0 < Omega1 makes the sign
(-1)^(sum e - 1) without exception.

Everything here is integer/rational; no floating-point value ever enters a
sign determination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError
from .report import Report
from .special import double_factorial

__all__ = [
    "ExponentVector",
    "XiCoefficient",
    "power_count",
    "enumerate_exponents",
    "xi_product",
    "xi_alpha_limit",
    "psi",
    "psi_grouped",
    "omega",
    "gap_limit_coefficient",
    "omega_inequality_scan",
    "gap_convolution_check",
]

_Q_MAX = 12


@dataclass(frozen=True)
class ExponentVector:
    """Full exponent vector (e_0, ..., e_q) of a coefficient-function monomial."""

    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if not entries or any(e < 0 for e in entries):
            raise DomainError(f"exponents must be nonnegative, got {entries}")
        object.__setattr__(self, "entries", entries)

    @property
    def q(self) -> int:
        return len(self.entries) - 1

    @property
    def tail(self) -> tuple[int, ...]:
        return self.entries[1:]

    @property
    def power_count(self) -> int:
        return power_count(self.tail)


@dataclass(frozen=True)
class XiCoefficient:
    """One coefficient of an observable's expansion, at the radius limit."""

    observable: str
    q: int
    e: tuple[int, ...]
    value_at_limit: Fraction


def power_count(tail: tuple[int, ...]) -> int:
    """Weighted sum k * e_k over the tail (e_1, ..., e_q)."""
    return sum((k + 1) * e for k, e in enumerate(tail))


@lru_cache(maxsize=4096)
def enumerate_exponents(q: int, m: int) -> tuple[tuple[int, ...], ...]:
    """All tails (e_1, ..., e_q) with power count m, lexicographically.

    Entries above index m are forced to zero by the power count, so the
    result is independent of q beyond padding.
    """
    if q < 0 or m < 0 or q > _Q_MAX or m > _Q_MAX:
        raise DomainError(f"need 0 <= q, m <= {_Q_MAX}, got q={q}, m={m}")
    out: list[tuple[int, ...]] = []

    def rec(position: int, remaining: int, prefix: tuple[int, ...]):
        if position > q:
            if remaining == 0:
                out.append(prefix)
            return
        budget = remaining // position
        for e in range(budget + 1):
            rec(position + 1, remaining - position * e, prefix + (e,))

    rec(1, m, ())
    return tuple(out)


def _tail_multinomial(tail: tuple[int, ...]) -> int:
    """(sum e)! / prod e_k!, the ordering count of the tail's parts."""
    total = sum(tail)
    out = math.factorial(total)
    for e in tail:
        out //= math.factorial(e)
    return out


def _pad(entries: tuple[int, ...], length: int) -> tuple[int, ...]:
    return entries + (0,) * (length - len(entries))


def xi_product(f_coeffs: dict, g_coeffs: dict, q: int,
               e: tuple[int, ...]):
    """Coefficient of the product observable at (q, e).

    Operands are maps {(order, full exponent tuple): value}; the product
    coefficient convolves over order splits and componentwise splits of the
    exponent vector.  Sums of observables just add coefficient maps
    componentwise, so only the product needs machinery.
    """
    e = tuple(e)
    if len(e) != q + 1:
        raise DomainError(f"exponent vector must have length q+1={q + 1}, got {e}")
    total = 0
    for (ell, c), fc in f_coeffs.items():
        if ell > q:
            continue
        m = q - ell
        c_pad = _pad(c, q + 1)
        if any(ci > ei for ci, ei in zip(c_pad, e)):
            continue
        d_pad = tuple(ei - ci for ei, ci in zip(e, c_pad))
        if any(d_pad[i] for i in range(m + 1, q + 1)):
            continue
        gd = g_coeffs.get((m, d_pad[: m + 1]))
        if gd is not None:
            total += fc * gd
    return total


def xi_alpha_limit(q: int, e, k: int) -> Fraction:
    """Radius limit of the single-integral coefficient at order q.

    Only the exponent pattern with e_q = 1 and all lower entries zero
    survives; its value is (2(k+q)-1)!! / q!.  The leading bookkeeping
    factor (the reduced-dimension mass) is normalized to one, as it cancels
    in every ratio this module ultimately cares about.  The result is
    summed over the zeroth exponent, hence depends only on the tail.
    """
    if q < 0 or k < 0:
        raise DomainError(f"need q >= 0 and k >= 0, got q={q}, k={k}")
    entries = tuple(int(x) for x in e)
    if len(entries) == q + 1:
        tail = entries[1:]
    elif len(entries) == q:
        tail = entries
    else:
        raise DomainError(
            f"exponent vector must have length q={q} (tail) or q+1, got {entries}"
        )
    expected = _pad((), q)
    if q >= 1:
        expected = expected[: q - 1] + (1,)
    if tail != expected:
        return Fraction(0)
    return Fraction(double_factorial(2 * (k + q) - 1), math.factorial(q))


def psi(p: int, tail: tuple[int, ...]) -> int:
    """Split-convolution weight: ordered two-way splits of the tail.

    Enumerates pairs of tails with power counts summing to p whose
    componentwise sum reproduces the input, each weighted by both parts'
    multinomial ordering counts.  Zero unless the tail's own power count
    equals p.
    """
    tail = tuple(int(x) for x in tail)
    if p < 0:
        raise DomainError(f"need p >= 0, got {p}")
    q = len(tail)
    if power_count(tail) != p:
        return 0
    total = 0
    for ell in range(p + 1):
        m = p - ell
        for c in enumerate_exponents(q, ell):
            if any(ci > ei for ci, ei in zip(c, tail)):
                continue
            d = tuple(ei - ci for ei, ci in zip(tail, c))
            if power_count(d) != m:
                continue
            total += _tail_multinomial(c) * _tail_multinomial(d)
    return total


def psi_grouped(p: int, tail: tuple[int, ...]) -> int:
    """Alternative route to the split weight: group by the first part's
    power count and walk componentwise sub-tails directly."""
    tail = tuple(int(x) for x in tail)
    if p < 0:
        raise DomainError(f"need p >= 0, got {p}")
    if power_count(tail) != p:
        return 0
    total = 0

    def rec(i: int, sub: tuple[int, ...]):
        nonlocal total
        if i == len(tail):
            rest = tuple(e - c for e, c in zip(tail, sub))
            total += _tail_multinomial(sub) * _tail_multinomial(rest)
            return
        for c in range(tail[i] + 1):
            rec(i + 1, sub + (c,))

    rec(0, ())
    return total


def _decrement(tail: tuple[int, ...], *positions: int) -> tuple[int, ...]:
    out = list(tail)
    for pos in positions:
        out[pos - 1] -= 1
    return tuple(out)


def omega(which: int, q: int, tail: tuple[int, ...]) -> int:
    """The two split weights competing in the variance-gap limit.

    ``which = 0``: pairs of distinct positive positions r > s with
    r + s <= q, weighted by (r - s)^2, on the doubly decremented tail.
    ``which = 1``: single positions l, weighted by l^2, on the singly
    decremented tail.  The sign law reduces to omega0 < omega1.
    """
    if which not in (0, 1):
        raise DomainError(f"which must be 0 or 1, got {which}")
    tail = tuple(int(x) for x in tail)
    q_eff = len(tail)
    if q != q_eff:
        tail = _pad(tail, q) if q_eff < q else tail
        if len(tail) != q:
            raise DomainError(f"tail {tail} longer than q={q}")
    if power_count(tail) != q:
        raise DomainError(
            f"tail {tail} has power count {power_count(tail)}, expected q={q}"
        )
    total = 0
    if which == 1:
        for ell in range(1, q + 1):
            if tail[ell - 1] >= 1:
                total += ell * ell * psi(q - ell, _decrement(tail, ell))
    else:
        for r in range(1, q + 1):
            for s in range(1, r):
                if r + s > q:
                    continue
                if tail[r - 1] >= 1 and tail[s - 1] >= 1:
                    total += (r - s) ** 2 * psi(q - r - s, _decrement(tail, r, s))
    return total


def gap_limit_coefficient(q: int, tail: tuple[int, ...]) -> Fraction:
    """Radius limit of the variance-gap coefficient at order q, summed over
    the zeroth exponent; exact rational."""
    tail = tuple(int(x) for x in tail)
    if power_count(tail) != q:
        raise DomainError(
            f"tail {tail} has power count {power_count(tail)}, expected {q}"
        )
    weight = Fraction(1)
    for k, e_k in enumerate(tail, start=1):
        if e_k:
            weight *= Fraction(double_factorial(2 * k - 1),
                               math.factorial(k)) ** e_k
    sign = (-1) ** sum(tail)
    return 4 * sign * weight * (omega(0, q, tail) - omega(1, q, tail))


def omega_inequality_scan(q_max: int) -> Report:
    """Exhaustive exact verification of the weight inequalities and sign law.

    Scans every admissible tail through q_max: the pointwise inequality
    between the paired and single weights (strict whenever the splitting
    tail has at least two parts), omega0 < omega1, and the resulting sign
    of each gap coefficient.
    """
    if not 1 <= q_max <= 8:
        raise DomainError(f"need 1 <= q_max <= 8, got {q_max}")
    report = Report("omega-scan")

    # Pointwise weight inequality over all splitting tails.
    worst = None
    checked = 0
    violations = 0
    for t in range(1, q_max + 1):
        for c in enumerate_exponents(q_max, t):
            lhs = sum(
                (r - s) ** 2 * c[s - 1] * c[r - 1]
                for r in range(1, q_max + 1)
                for s in range(1, r)
                if r + s <= q_max
            )
            parts = sum(c)
            rhs = sum(ell * ell * c[ell - 1] for ell in range(1, q_max + 1)) \
                * (parts - 1)
            checked += 1
            margin = rhs - lhs
            ok = margin > 0 if parts >= 2 else margin >= 0
            if not ok:
                violations += 1
            if worst is None or margin < worst:
                worst = margin
    report.add("pointwise-weight-inequality", violations == 0,
               float(worst if worst is not None else 0),
               detail=f"{checked} splitting tails scanned, {violations} violations")

    for q in range(1, q_max + 1):
        tails = enumerate_exponents(q, q)
        bad = [t for t in tails if not omega(0, q, t) < omega(1, q, t)]
        min_gap = min(omega(1, q, t) - omega(0, q, t) for t in tails)
        report.add(f"omega0<omega1[q={q}]", not bad, float(min_gap),
                   detail=f"{len(tails)} tails, min gap {min_gap}")

    for q in range(1, min(q_max, 6) + 1):
        tails = enumerate_exponents(q, q)
        bad_sign = []
        for t in tails:
            value = gap_limit_coefficient(q, t)
            want = (-1) ** (sum(t) - 1)
            if value == 0 or (1 if value > 0 else -1) != want:
                bad_sign.append(t)
            om0 = omega(0, q, t)
            if om0 == 0:
                weight = Fraction(1)
                for k, e_k in enumerate(t, start=1):
                    weight *= Fraction(double_factorial(2 * k - 1),
                                       math.factorial(k)) ** e_k
                if abs(value) != 4 * weight * omega(1, q, t):
                    bad_sign.append(t)
        report.add(f"sign-law[q={q}]", not bad_sign, float(len(tails)),
                   detail=f"{len(tails)} tails checked")
    return report


def _dn_limit(order: int, e_full: tuple[int, ...]) -> Fraction:
    """Limit coefficient of the gap numerator at (order, e).

    Supported exactly on vectors with two unit entries at positions a > b
    (positions counted from the zeroth exponent) summing to the order.
    """
    ones = [i for i, x in enumerate(e_full) if x == 1]
    if sum(e_full) != 2 or len(ones) != 2:
        return Fraction(0)
    b, a = ones
    if a + b != order:
        return Fraction(0)
    return 4 * (a - b) ** 2 \
        * Fraction(double_factorial(2 * a - 1), math.factorial(a)) \
        * Fraction(double_factorial(2 * b - 1), math.factorial(b))


def _dd_limit(order: int, e_full: tuple[int, ...]) -> Fraction:
    """Limit coefficient of the squared inverse mass at (order, e)."""
    if e_full[0] != 0:
        return Fraction(0)
    tail = e_full[1:]
    if power_count(tail) != order:
        return Fraction(0)
    weight = Fraction(1)
    for j, e_j in enumerate(tail, start=1):
        if e_j:
            weight *= Fraction(double_factorial(2 * j - 1),
                               math.factorial(j)) ** e_j
    return (-1) ** sum(tail) * weight * psi(order, tail)


def dn_limit_coefficient(q: int, e: tuple[int, ...]) -> XiCoefficient:
    e = tuple(int(x) for x in e)
    return XiCoefficient("gap-numerator", q, e, _dn_limit(q, e))


def dd_limit_coefficient(q: int, e: tuple[int, ...]) -> XiCoefficient:
    e = tuple(int(x) for x in e)
    return XiCoefficient("inverse-mass-squared", q, e, _dd_limit(q, e))


def gap_convolution_check(q_max: int) -> Report:
    """Two independent routes to the variance-gap limit coefficients.

    Route one is the closed form (semifactorial weights times the omega
    difference); route two convolves the numerator and inverse-mass
    coefficient maps explicitly over order and exponent splits, then sums
    the zeroth exponent.  Both are exact, so the comparison is equality.
    """
    if not 1 <= q_max <= 6:
        raise DomainError(f"need 1 <= q_max <= 6, got {q_max}")
    report = Report("gap-convolution")

    for q in range(1, q_max + 1):
        # Coefficient maps through order q, on full exponent vectors.
        dn_map = {}
        dd_map = {}
        for ell in range(q + 1):
            for e0 in range(3):
                for tail in enumerate_exponents(ell, ell):
                    full = (e0,) + _pad(tail, ell)
                    val = _dn_limit(ell, full)
                    if val:
                        dn_map[(ell, full)] = val
                    val = _dd_limit(ell, full)
                    if val:
                        dd_map[(ell, full)] = val

        for tail in enumerate_exponents(q, q):
            closed = gap_limit_coefficient(q, tail)
            convolved = Fraction(0)
            for e0 in range(3):
                e_full = (e0,) + _pad(tail, q)
                convolved += xi_product(dn_map, dd_map, q, e_full)
            report.add(
                f"route-equivalence[q={q},e={tail}]", closed == convolved,
                float(abs(closed)),
                detail=f"closed {closed}, convolved {convolved}",
            )

        zero_tail_violations = [
            key for key in dd_map if key[1][0] != 0
        ]
        report.add(f"inverse-mass-needs-e0=0[q={q}]", not zero_tail_violations,
                   float(len(dd_map)))
    return report


def inverse_mass_identity_check(q_max: int = 4) -> Report:
    """Convolving the mass expansion with its inverse returns the identity.

    The mass coefficients are the single-integral limits (multiplicity
    zero); the inverse-mass coefficients carry the signed multinomial
    weights.  Their product must be 1 at order zero and vanish at every
    higher order, in exact arithmetic.
    """
    report = Report("inverse-mass-identity")
    for q in range(0, q_max + 1):
        alpha_map = {}
        inv_map = {}
        for ell in range(q + 1):
            for tail in enumerate_exponents(ell, ell):
                full0 = (0,) + _pad(tail, ell)
                val = xi_alpha_limit(ell, full0, 0)
                if val:
                    alpha_map[(ell, full0)] = val
                # Inverse-mass limit: signed multinomial times semifactorial
                # weights, no zeroth-exponent support.
                weight = Fraction(1)
                for j, e_j in enumerate(tail, start=1):
                    if e_j:
                        weight *= Fraction(double_factorial(2 * j - 1),
                                           math.factorial(j)) ** e_j
                val = (-1) ** sum(tail) * _tail_multinomial(tail) * weight
                if power_count(tail) == ell:
                    inv_map[(ell, full0)] = val

        for tail in enumerate_exponents(q, q):
            e_full = (0,) + _pad(tail, q)
            product = xi_product(alpha_map, inv_map, q, e_full)
            expected = Fraction(1) if q == 0 else Fraction(0)
            report.add(f"identity[q={q},e={tail}]", product == expected,
                       0.0, detail=f"got {product}")
    return report
