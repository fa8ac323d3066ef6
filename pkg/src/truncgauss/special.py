"""Exact integer combinatorics and scalar special functions.

Integer routines return Python ints, so every combinatorial identity built
on top of them holds exactly.  The incomplete-gamma / Kummer evaluations
target ~1e-13 relative accuracy in float64 and never let a NaN or Inf
escape: iteration caps and overflow raise :class:`NumericError` instead.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, NumericError

__all__ = [
    "double_factorial",
    "stirling_second",
    "stirling_first_unsigned",
    "raising_factorial",
    "lower_incomplete_gamma",
    "kummer_M",
]

# Tables grow on demand and are only appended to, never mutated in place,
# so concurrent readers always see consistent rows.
_S2_ROWS: list[list[int]] = [[1]]  # {n brace m}, row n holds m = 0..n
_C1_ROWS: list[list[int]] = [[1]]  # [n brack m], unsigned first kind

_SERIES_CAP = 500
_CF_CAP = 300
_SERIES_TOL = 1e-15
_CF_TOL = 1e-15
# The Kummer series loses accuracy once x outruns s; switch to the
# continued fraction for the upper tail beyond this offset.
_SERIES_CUTOFF_OFFSET = 12.0


def double_factorial(n: int) -> int:
    """n!! with the empty-product conventions (-1)!! = 0!! = 1."""
    if n < -1:
        raise DomainError(f"double factorial undefined for n = {n} < -1")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def stirling_second(k: int, t: int) -> int:
    """Stirling number of the second kind {k brace t}; 0 when t > k."""
    if k < 0 or t < 0:
        return 0
    if t > k:
        return 0
    while len(_S2_ROWS) <= k:
        n = len(_S2_ROWS)
        prev = _S2_ROWS[n - 1]
        row = [0] * (n + 1)
        for m in range(1, n + 1):
            row[m] = m * (prev[m] if m < n else 0) + prev[m - 1]
        _S2_ROWS.append(row)
    return _S2_ROWS[k][t]


def stirling_first_unsigned(k: int, j: int) -> int:
    """Unsigned Stirling number of the first kind [k brack j]; 0 when j > k."""
    if k < 0 or j < 0:
        return 0
    if j > k:
        return 0
    while len(_C1_ROWS) <= k:
        n = len(_C1_ROWS)
        prev = _C1_ROWS[n - 1]
        row = [0] * (n + 1)
        for m in range(1, n + 1):
            row[m] = (n - 1) * (prev[m] if m < n else 0) + prev[m - 1]
        _C1_ROWS.append(row)
    return _C1_ROWS[k][j]


def raising_factorial(x, n: int):
    """x(x+1)...(x+n-1); the empty product for n = 0.

    Works for any numeric type (int, float, Fraction), staying exact for
    exact inputs.
    """
    if n < 0:
        raise DomainError(f"raising factorial needs n >= 0, got {n}")
    out = 1
    for i in range(n):
        out = out * (x + i)
    return out


def _kummer_sum(a: float, b: float, x: float) -> float:
    """Sum of the confluent hypergeometric series at (a, b, x)."""
    total = 1.0
    term = 1.0
    small_streak = 0
    for n in range(_SERIES_CAP):
        term *= (a + n) / (b + n) * x / (n + 1)
        total += term
        if abs(term) <= _SERIES_TOL * abs(total):
            small_streak += 1
            if small_streak >= 2:
                return total
        else:
            small_streak = 0
    raise NumericError(
        f"Kummer series did not converge in {_SERIES_CAP} terms "
        f"(a={a}, b={b}, x={x}, last term {term:.3e})"
    )


def kummer_M(a: float, b: float, x: float) -> float:
    """Confluent hypergeometric M(a, b, x) for b > 0 and x >= 0."""
    if b <= 0.0:
        raise DomainError(f"kummer_M requires b > 0, got b = {b}")
    if x < 0.0:
        raise DomainError(f"kummer_M requires x >= 0, got x = {x}")
    out = _kummer_sum(a, b, x)
    if not math.isfinite(out):
        raise NumericError(f"kummer_M overflow at (a={a}, b={b}, x={x})")
    return out


def _upper_gamma_cf(s: float, x: float) -> float:
    """Upper incomplete gamma via a modified-Lentz continued fraction.

    Valid and fast for x > s; returns Gamma(s, x).
    """
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _CF_CAP + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_TOL:
            return math.exp(s * math.log(x) - x) * h
    raise NumericError(
        f"incomplete-gamma continued fraction did not converge in "
        f"{_CF_CAP} iterations (s={s}, x={x})"
    )


def lower_incomplete_gamma(s: float, x: float) -> float:
    """Lower incomplete gamma  integral of t^(s-1) e^(-t) over (0, x).

    Series route (through the Kummer representation) below x = s + 12,
    complement of a continued fraction above; both capped, never silently
    truncated.
    """
    if s <= 0.0:
        raise DomainError(f"lower_incomplete_gamma requires s > 0, got s = {s}")
    if x < 0.0:
        raise DomainError(f"lower_incomplete_gamma requires x >= 0, got x = {x}")
    if x == 0.0:
        return 0.0
    try:
        whole = math.gamma(s)
    except OverflowError as exc:
        raise NumericError(f"Gamma({s}) overflows float64") from exc
    if math.isinf(x):
        return whole
    if x < s + _SERIES_CUTOFF_OFFSET:
        out = math.exp(s * math.log(x) - x) / s * _kummer_sum(1.0, 1.0 + s, x)
    else:
        out = whole - _upper_gamma_cf(s, x)
    if not math.isfinite(out):
        raise NumericError(f"lower_incomplete_gamma overflow at (s={s}, x={x})")
    return out


def _lower_incomplete_gamma_vec(s: float, x: np.ndarray) -> np.ndarray:
    """Vectorized lower incomplete gamma at fixed s (internal fast path).

    Same algorithm and tolerances as the scalar routine; used by the
    nested quadrature where x arrives as an array.
    """
    x = np.asarray(x, dtype=np.float64)
    if s <= 0.0:
        raise DomainError(f"lower_incomplete_gamma requires s > 0, got s = {s}")
    if np.any(x < 0.0):
        raise DomainError("lower_incomplete_gamma requires x >= 0")
    out = np.zeros_like(x)
    whole = math.gamma(s)

    ser = (x > 0.0) & (x < s + _SERIES_CUTOFF_OFFSET)
    if np.any(ser):
        xs = x[ser]
        total = np.ones_like(xs)
        term = np.ones_like(xs)
        active = np.ones(xs.shape, dtype=bool)
        converged_at = np.full(xs.shape, -1)
        for n in range(_SERIES_CAP):
            term[active] *= xs[active] / (1.0 + s + n)
            total[active] += term[active]
            done = active & (np.abs(term) <= _SERIES_TOL * np.abs(total))
            # require two consecutive small terms, as in the scalar path
            newly = done & (converged_at == n - 1)
            converged_at[done] = n
            active &= ~newly
            if not active.any():
                break
        else:
            raise NumericError(
                f"vectorized incomplete-gamma series hit the {_SERIES_CAP}-term cap"
            )
        out[ser] = np.exp(s * np.log(xs) - xs) / s * total

    cf = x >= s + _SERIES_CUTOFF_OFFSET
    if np.any(cf):
        xc = x[cf]
        tiny = 1e-300
        b = xc + 1.0 - s
        c = np.full_like(xc, 1.0 / tiny)
        d = 1.0 / b
        h = d.copy()
        active = np.ones(xc.shape, dtype=bool)
        for i in range(1, _CF_CAP + 1):
            an = -i * (i - s)
            b = b + 2.0
            d = an * d + b
            np.copyto(d, tiny, where=np.abs(d) < tiny)
            c = b + an / c
            np.copyto(c, tiny, where=np.abs(c) < tiny)
            d = 1.0 / d
            delta = d * c
            h *= np.where(active, delta, 1.0)
            active &= np.abs(delta - 1.0) >= _CF_TOL
            if not active.any():
                break
        else:
            raise NumericError(
                f"vectorized incomplete-gamma continued fraction hit the "
                f"{_CF_CAP}-iteration cap"
            )
        out[cf] = whole - np.exp(s * np.log(xc) - xc) * h

    if not np.all(np.isfinite(out)):
        raise NumericError(f"vectorized lower_incomplete_gamma overflow at s={s}")
    return out
