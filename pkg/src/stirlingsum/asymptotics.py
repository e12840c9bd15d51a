"""Symbolic asymptotic tails for sums of f(k) with f(x) = c * x^s * log(x)^m.

The tail of the classical summation formula,

    (1/2) f(n) + sum_{k>=2} (B_k / k!) f^(k-1)(n),

is computed exactly over the ring of log-power terms and collected by log
power, giving an independent derivation of each catalog family's inverse-power
coefficients. The alternating families (items built on Euler numbers) do not
come from this machinery; their closed-form inner coefficients are produced by
:func:`boole_tail` so they flow through the same transformation pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .exactnum import DomainError, bernoulli, euler_number
from .transform import InnerCoefficients

__all__ = ["LogPowerTerm", "EMTail", "differentiate", "em_tail", "boole_tail"]


@dataclass(frozen=True)
class LogPowerTerm:
    """coef * x^s * log(x)^m, with exact rational coef and s."""

    coef: Fraction
    s: Fraction
    m: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "coef", Fraction(self.coef))
        object.__setattr__(self, "s", Fraction(self.s))
        if self.m < 0:
            raise DomainError(f"log power must be >= 0, got {self.m}")


def _merge(terms) -> tuple[LogPowerTerm, ...]:
    acc: dict[tuple[int, Fraction], Fraction] = {}
    for t in terms:
        key = (t.m, t.s)
        acc[key] = acc.get(key, Fraction(0)) + t.coef
    return tuple(
        LogPowerTerm(c, s, m)
        for (m, s), c in sorted(acc.items(), reverse=True)
        if c
    )


def differentiate(f) -> tuple[LogPowerTerm, ...]:
    """Exact derivative of a sum of log-power terms, like terms merged.

    d/dx (c x^s log^m x) = c*s x^(s-1) log^m x + c*m x^(s-1) log^(m-1) x.
    """
    out = []
    for t in f:
        if t.coef == 0:
            continue
        if t.s:
            out.append(LogPowerTerm(t.coef * t.s, t.s - 1, t.m))
        if t.m:
            out.append(LogPowerTerm(t.coef * t.m, t.s - 1, t.m - 1))
    return _merge(out)


@dataclass(frozen=True)
class EMTail:
    """Tail coefficients grouped by log power.

    ``groups[j]`` is a tuple of (exponent, coef) pairs, exponents descending:
    the tail contribution  sum coef * n^exponent * log(n)^j.
    """

    groups: dict[int, tuple[tuple[Fraction, Fraction], ...]]

    def coef(self, j: int, exponent) -> Fraction:
        exponent = Fraction(exponent)
        for e, c in self.groups.get(j, ()):
            if e == exponent:
                return c
        return Fraction(0)

    def as_dict(self) -> dict[tuple[int, Fraction], Fraction]:
        return {
            (j, e): c for j, pairs in self.groups.items() for e, c in pairs
        }


def em_tail(f, L: int) -> EMTail:
    """(1/2) f + sum_{k=2}^{L+1} (B_k/k!) f^(k-1), exactly, grouped by log power."""
    if L < 1:
        raise DomainError(f"need L >= 1, got {L}")
    terms: list[LogPowerTerm] = [
        LogPowerTerm(t.coef / 2, t.s, t.m) for t in f if t.coef
    ]
    deriv = _merge(f)
    for k in range(2, L + 2):
        # deriv currently holds f^(k-2); advance to f^(k-1).
        deriv = differentiate(deriv)
        if not deriv:
            break
        bk = bernoulli(k)
        if not bk:
            continue
        scale = bk / math.factorial(k)
        terms.extend(LogPowerTerm(scale * t.coef, t.s, t.m) for t in deriv)
    merged = _merge(terms)
    groups: dict[int, list[tuple[Fraction, Fraction]]] = {}
    for t in merged:
        groups.setdefault(t.m, []).append((t.s, t.coef))
    return EMTail(
        groups={
            j: tuple(sorted(pairs, reverse=True)) for j, pairs in groups.items()
        }
    )


GREGORY_LEIBNIZ = "gregory_leibniz"
ALT_HARMONIC = "alt_harmonic"


def boole_tail(family: str, L: int) -> InnerCoefficients:
    """Closed-form inverse-power coefficients for the alternating families.

    ``gregory_leibniz``: a_l = (-1)^(l+1) E_l / 2^l  (odd Euler numbers vanish,
    so the first nonzero entry is l = 2 — the transformed series visibly
    starts one denominator later).
    ``alt_harmonic``:    a_l = (-1)^(l(l+3)/2) (2^(l+1) - 1) |B_(l+1)| / (l+1).
    """
    if L < 1:
        raise DomainError(f"need L >= 1, got {L}")
    if family == GREGORY_LEIBNIZ:
        def fn(l: int) -> Fraction:
            return Fraction((-1) ** (l + 1) * euler_number(l), 2**l)
    elif family == ALT_HARMONIC:
        def fn(l: int) -> Fraction:
            sign = (-1) ** ((l * (l + 3)) // 2)
            return sign * (2 ** (l + 1) - 1) * abs(bernoulli(l + 1)) / (l + 1)
    else:
        raise DomainError(f"unknown alternating family {family!r}")
    return InnerCoefficients(fn=fn, support_hint=None)
