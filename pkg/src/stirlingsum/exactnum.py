"""Exact integer/rational substrate: Stirling numbers of the first kind and
the combinatorial number families (Bernoulli, Euler, tangent, Gregory,
Stirling-series, extended double factorials) that feed every series in the
catalog.

All values are exact: integers stay ``int``, rationals are
:class:`fractions.Fraction` in canonical form (reduced, positive denominator,
zero as 0/1). Caches are append-only and never evicted — every sequence here
is tiny (a few hundred entries at most) compared to the cost of recomputing.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from typing import Iterator

__all__ = [
    "DomainError",
    "ExactRational",
    "stirling_first",
    "stirling_row",
    "stirling_rows",
    "bernoulli",
    "euler_number",
    "tangent_number",
    "gregory_number",
    "stirling_a",
    "double_factorial_ext",
]

# Canonical exact-rational type. Fraction already enforces the invariants we
# need: gcd-reduced, denominator >= 1, zero stored as 0/1.
ExactRational = Fraction


class DomainError(ValueError):
    """An argument is outside an operation's mathematical domain."""


# ---------------------------------------------------------------------------
# Signed Stirling numbers of the first kind
# ---------------------------------------------------------------------------
#
# Row recurrence: S_{k+1}(l) = S_k(l-1) - k*S_k(l), with S_0(0) = 1.
# Rows up to _ROW_CACHE_LIMIT are cached whole; larger rows are streamed from
# the last cached row so a single huge query cannot pin hundreds of megabytes
# of big integers in memory.

_ROW_CACHE_LIMIT = 300
_row_cache: list[tuple[int, ...]] = [(1,)]
_row_lock = threading.Lock()


def _next_row(row: tuple[int, ...], k: int) -> tuple[int, ...]:
    # row is row k (length k+1); produce row k+1.
    prev = (0,) + row
    return tuple(
        prev[l] - k * (row[l] if l <= k else 0) for l in range(k + 2)
    )


def stirling_row(k: int) -> tuple[int, ...]:
    """Row ``k`` of the signed Stirling triangle: entry ``l`` is S_k^(1)(l)."""
    if k < 0:
        raise DomainError(f"row index must be >= 0, got {k}")
    with _row_lock:
        while len(_row_cache) <= min(k, _ROW_CACHE_LIMIT):
            kk = len(_row_cache) - 1
            _row_cache.append(_next_row(_row_cache[-1], kk))
        if k < len(_row_cache):
            return _row_cache[k]
        row = _row_cache[-1]
        kk = len(_row_cache) - 1
    while kk < k:
        row = _next_row(row, kk)
        kk += 1
    return row


def stirling_rows(start: int = 1) -> Iterator[tuple[int, tuple[int, ...]]]:
    """Yield ``(k, row_k)`` forever from ``k = start``, streaming in O(row) memory."""
    row = stirling_row(start)
    k = start
    while True:
        yield k, row
        row = _next_row(row, k)
        k += 1


def stirling_first(k: int, l: int) -> int:
    """Signed Stirling number of the first kind S_k^(1)(l).

    These are the connection coefficients between rising factorials and plain
    powers: x(x+1)...(x+k-1) = (-1)^k * sum_l (-1)^l S_k^(1)(l) x^l.
    """
    if k < 0 or l < 0:
        raise DomainError(f"indices must be >= 0, got ({k}, {l})")
    if l > k:
        raise DomainError(f"column {l} exceeds row {k}")
    return stirling_row(k)[l]


# ---------------------------------------------------------------------------
# Zigzag (up/down) numbers via the Seidel boustrophedon triangle
# ---------------------------------------------------------------------------
#
# One integer-only triangle yields both number families the catalog leans on:
# Z_{2m} is the m-th secant number |E_{2m}| and Z_{2m-1} the m-th tangent
# number.  Each new row costs only big-integer additions, which keeps the fill
# cheap even for the few-thousand-index runs that high-precision recovery
# needs (the textbook binomial recurrences go quadratic in `comb` calls of
# huge arguments instead).

_zigzag_values: list[int] = [1]  # Z_0, Z_1, ...
_zigzag_row: list[int] = [1]  # Entringer row for the last filled index
_zigzag_lock = threading.Lock()


def _zigzag(n: int) -> int:
    global _zigzag_row
    with _zigzag_lock:
        while len(_zigzag_values) <= n:
            m = len(_zigzag_values)
            prev = _zigzag_row
            row = [0] * (m + 1)
            acc = 0
            for j in range(1, m + 1):
                acc += prev[m - j]
                row[j] = acc
            _zigzag_row = row
            _zigzag_values.append(acc)
        return _zigzag_values[n]


# ---------------------------------------------------------------------------
# Bernoulli numbers, convention B_1 = -1/2 (coefficients of x/(e^x - 1))
# ---------------------------------------------------------------------------


def bernoulli(k: int) -> Fraction:
    """B_k with B_0 = 1, B_1 = -1/2; odd indices >= 3 vanish.

    Even indices come from the tangent numbers,
    B_2m = (-1)^(m+1) 2m Z_{2m-1} / (2^2m (2^2m - 1)).
    """
    if k < 0:
        raise DomainError(f"index must be >= 0, got {k}")
    if k == 0:
        return Fraction(1)
    if k == 1:
        return Fraction(-1, 2)
    if k % 2:
        return Fraction(0)
    m = k // 2
    p = 1 << k
    sign = 1 if m % 2 else -1
    return Fraction(sign * k * _zigzag(k - 1), p * (p - 1))


# ---------------------------------------------------------------------------
# Euler numbers (integer, sech convention: 2 e^x / (e^{2x} + 1))
# ---------------------------------------------------------------------------


def euler_number(k: int) -> int:
    """E_k with E_0 = 1; odd indices vanish, E_2 = -1, E_4 = 5, ..."""
    if k < 0:
        raise DomainError(f"index must be >= 0, got {k}")
    if k % 2:
        return 0
    sign = -1 if (k // 2) % 2 else 1
    return sign * _zigzag(k)


def tangent_number(k: int) -> Fraction:
    """T_k = 2^(2k) (2^(2k) - 1) |B_2k| / (2k); a positive integer for k >= 1."""
    if k < 1:
        raise DomainError(f"tangent numbers start at index 1, got {k}")
    p = 1 << (2 * k)
    return Fraction(p * (p - 1)) * abs(bernoulli(2 * k)) / (2 * k)


def gregory_number(k: int) -> Fraction:
    """C_k = (1/k!) sum_{l=0}^{k} S_k^(1)(l) / (l+1).

    Equivalently the integral over [0, 1] of the degree-k falling factorial
    divided by k!; these are the coefficients of z/log(1+z).
    """
    if k < 0:
        raise DomainError(f"index must be >= 0, got {k}")
    row = stirling_row(k)
    acc = sum(Fraction(row[l], l + 1) for l in range(k + 1))
    return acc / math.factorial(k)


def stirling_a(k: int) -> Fraction:
    """The k-th coefficient of the convergent factorial-series form of
    Stirling's n! approximation: a_1 = 1/12, a_2 = 1/12, a_3 = 59/360, ...
    """
    if k < 1:
        raise DomainError(f"sequence starts at index 1, got {k}")
    row = stirling_row(k)
    acc = sum(
        (-1) ** l * Fraction(l, (l + 1) * (l + 2)) * row[l]
        for l in range(1, k + 1)
    )
    return Fraction((-1) ** k, 2 * k) * acc


def double_factorial_ext(m: int) -> Fraction:
    """Double factorial on odd integers, extended to negative arguments.

    For m >= -1 this is the usual m!! (with (-1)!! = 1). For m = -(2j+1),
    j >= 1, the value is (-1)^j / (2j-1)!! — the unique continuation under
    (m+2)!! = (m+2) * m!!.
    """
    if m % 2 == 0:
        raise DomainError(f"argument must be odd, got {m}")
    if m >= -1:
        acc = 1
        while m > 1:
            acc *= m
            m -= 2
        return Fraction(acc)
    j = (-m - 1) // 2
    return Fraction((-1) ** j, int(double_factorial_ext(2 * j - 1)))
