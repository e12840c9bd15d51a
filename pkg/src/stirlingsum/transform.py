"""The coefficient transformation and the inverse-factorial series evaluator.

An inverse-power tail  sum_{l>=1} a_l / x^(l+1)  (usually divergent as an
actual series, meaningful as an asymptotic one) is mapped exactly onto an
inverse-factorial series

    sum_{k>=1} c_k / (x (x+1) ... (x+k)),
    c_k = (-1)^k sum_{l=1}^{k} (-1)^l a_l S_k^(1)(l),

which converges for every x > 0. The map is linear and exact over the
rationals; this module computes it exactly and evaluates the resulting series
to a requested decimal precision with an adaptive stopping rule.
"""

from __future__ import annotations

import math
import threading
import time
import weakref
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence, Union

from mpmath import mp, mpf

from .exactnum import DomainError, stirling_rows

# mpmath's working precision is process-global state, so numeric kernels
# across the package hold this (reentrant) lock while adjusting it.  Cache
# reads and exact rational work never touch it.
_PRECISION_LOCK = threading.RLock()

__all__ = [
    "InnerCoefficients",
    "StirlingCoefficients",
    "EvalContext",
    "EvaluationReport",
    "ConsistencyReport",
    "NonConvergenceError",
    "weniger_transform",
    "pochhammer",
    "eval_stirling_series",
    "verify_transform_consistency",
]

AT_X = "at_x"  # denominators x(x+1)...(x+k)
AT_X_PLUS_1 = "at_x_plus_1"  # denominators (x+1)...(x+k)


@dataclass(frozen=True)
class InnerCoefficients:
    """Inverse-power coefficients a_l (l >= 1), lazily generated and exact.

    ``fn`` must be total and deterministic for l >= 1. ``support_hint``, when
    set, promises a_l = 0 for every l beyond it.
    """

    fn: Callable[[int], Fraction]
    support_hint: int | None = None

    def __call__(self, l: int) -> Fraction:
        if self.support_hint is not None and l > self.support_hint:
            return Fraction(0)
        return Fraction(self.fn(l))


@dataclass(frozen=True)
class StirlingCoefficients:
    """A finite prefix c_1..c_K of exact inverse-factorial coefficients."""

    values: tuple[Fraction, ...]

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> Fraction:
        return self.values[i]


@dataclass(frozen=True)
class EvalContext:
    """Precision and truncation policy for series evaluation.

    ``guard`` defaults to 10 + ceil(digits/10): per-term rounding error grows
    only linearly in the (few hundred) terms used.
    """

    digits: int = 30
    guard: int | None = None
    max_terms: int = 500
    stop_rule: int = 3

    def __post_init__(self) -> None:
        if self.guard is None:
            object.__setattr__(self, "guard", 10 + math.ceil(self.digits / 10))
        if self.digits < 1:
            raise DomainError(f"digits must be >= 1, got {self.digits}")
        if self.guard < 10:
            raise DomainError(f"guard must be >= 10, got {self.guard}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")
        if self.stop_rule < 2:
            raise DomainError(f"stop_rule must be >= 2, got {self.stop_rule}")

    @property
    def working_digits(self) -> int:
        return self.digits + self.guard


@dataclass(frozen=True)
class EvaluationReport:
    """Result of a series (or formula) evaluation."""

    value: mpf
    terms_used: int
    est_error: mpf  # 2 x |first omitted term|
    precision_used: int  # working precision, decimal digits
    elapsed: float  # seconds


@dataclass(frozen=True)
class ConsistencyReport:
    """Two truncations of the same content, for asymptotic cross-checks."""

    factorial_sum: mpf
    inverse_power_sum: mpf
    difference: mpf


class NonConvergenceError(ArithmeticError):
    """The stopping rule did not fire within max_terms.

    Carries the partial :class:`EvaluationReport`; typically means x is too
    small for the requested precision.
    """

    def __init__(self, message: str, report: EvaluationReport):
        super().__init__(message)
        self.report = report


def weniger_transform(a: InnerCoefficients, K: int) -> StirlingCoefficients:
    """Exact c_1..c_K for the inverse-power coefficients ``a``."""
    if K < 1:
        raise DomainError(f"need K >= 1, got {K}")
    return StirlingCoefficients(tuple(c for _, c in _transform_stream(a, K)))


@dataclass
class _StreamCheckpoint:
    """Resumable transform state: c_1..c_k plus the scaled-weight vector at k."""

    coeffs: list[Fraction]
    Q: int
    weights: list[int]


# Transformed coefficients depend only on the inner sequence, never on x, so
# streams for the same InnerCoefficients instance (each catalog formula keeps
# one for its lifetime) resume from the longest prefix computed so far instead
# of redoing the Stirling dot products. Capped so a one-off deep run cannot
# pin big-integer state forever.
_CHECKPOINT_LIMIT = 512
_checkpoints: "weakref.WeakKeyDictionary[InnerCoefficients, _StreamCheckpoint]" = (
    weakref.WeakKeyDictionary()
)
_checkpoint_lock = threading.Lock()


def _transform_stream(
    a: InnerCoefficients, K: int | None
) -> Iterator[tuple[int, Fraction]]:
    """Yield (k, c_k) for k = 1.. (up to K if given), exactly.

    The dot product against the Stirling row is done in scaled integers: Q is
    a running common denominator for a_1..a_k and W_l = (-1)^l * a_l * Q, so
    each c_k costs k big-integer multiplies and a single reduction instead of
    k Fraction operations.
    """
    with _checkpoint_lock:
        cp = _checkpoints.get(a)
        done = list(cp.coeffs) if cp else []
        Q = cp.Q if cp else 1
        weights = list(cp.weights) if cp else []
    for i, ck in enumerate(done, start=1):
        if K is not None and i > K:
            return
        yield i, ck
    start = len(done) + 1
    if K is not None and start > K:
        return
    support = a.support_hint
    reached = len(done)
    cap_state: tuple[int, list[int]] | None = None
    try:
        for k, row in stirling_rows(start):
            if K is not None and k > K:
                return
            if support is None or k <= support:
                al = a(k)
                q = al.denominator
                g = math.gcd(Q, q)
                grow = q // g
                if grow > 1:
                    weights = [w * grow for w in weights]
                    Q *= grow
                weights.append((-1) ** k * al.numerator * (Q // q))
            upto = min(k, support) if support is not None else k
            dot = sum(weights[l - 1] * row[l] for l in range(1, upto + 1))
            ck = Fraction((-1) ** k * dot, Q)
            done.append(ck)
            reached = k
            if k == _CHECKPOINT_LIMIT:
                cap_state = (Q, weights.copy())
            yield k, ck
    finally:
        keep = min(reached, _CHECKPOINT_LIMIT)
        if keep > (len(cp.coeffs) if cp else 0):
            state = (Q, weights.copy()) if reached <= _CHECKPOINT_LIMIT else cap_state
            assert state is not None
            with _checkpoint_lock:
                current = _checkpoints.get(a)
                if current is None or len(current.coeffs) < keep:
                    _checkpoints[a] = _StreamCheckpoint(done[:keep], state[0], state[1])


def pochhammer(x, k: int):
    """Rising factorial x(x+1)...(x+k-1); exact for int/Fraction x, mpf otherwise."""
    if k < 0:
        raise DomainError(f"need k >= 0, got {k}")
    if isinstance(x, (int, Fraction)):
        acc = Fraction(1)
        for i in range(k):
            acc *= x + i
        return int(acc) if isinstance(x, int) else acc
    acc = mpf(1)
    for i in range(k):
        acc *= x + i
    return acc


CoefficientSource = Union[StirlingCoefficients, InnerCoefficients]


def _coefficient_stream(c: CoefficientSource) -> Iterator[tuple[int, Fraction]]:
    if isinstance(c, StirlingCoefficients):
        return iter(enumerate(c.values, start=1))
    return _transform_stream(c, None)


def required_terms_estimate(x: float, digits: float) -> int:
    """Rough k with |term_k| ~ Gamma(x) Gamma(k) / Gamma(x+k+1) < 10^-digits.

    Models the coefficients as (k-1)!-sized, which both observed regimes obey
    within a small factor: geometric decay while k << x and k^-(x+1) decay
    beyond. Used only to refuse clearly hopeless runs, always with a wide
    margin on top.
    """
    target = -digits * math.log(10)

    def log_term(k: float) -> float:
        return math.lgamma(k) + math.lgamma(x) - math.lgamma(x + k + 1)

    hi = 2.0
    while log_term(hi) > target:
        hi *= 2
        if hi > 1e9:
            return 10**9
    lo = hi / 2 if hi > 2 else 1.0
    while hi - lo > max(1.0, lo * 1e-3):
        mid = (lo + hi) / 2
        if log_term(mid) > target:
            lo = mid
        else:
            hi = mid
    return int(hi) + 1


def _to_mpf(q: Fraction) -> mpf:
    return mpf(q.numerator) / q.denominator if q.denominator != 1 else mpf(q.numerator)


def eval_stirling_series(
    c: CoefficientSource,
    x,
    start_shift: str = AT_X,
    ctx: EvalContext | None = None,
) -> EvaluationReport:
    """Evaluate  sum_k c_k / D_k(x)  with D_k = x(x+1)..(x+k) or (x+1)..(x+k).

    Coefficients stay exact until the one floating division per term. The sum
    stops once ``ctx.stop_rule`` consecutive terms fall below
    10^-(digits + guard/2) relative to the running partial sum (exact zero
    terms count as small), or fails with :class:`NonConvergenceError` at
    ``ctx.max_terms``.
    """
    ctx = ctx or EvalContext()
    if start_shift not in (AT_X, AT_X_PLUS_1):
        raise DomainError(f"unknown start_shift {start_shift!r}")
    t0 = time.perf_counter()
    with _PRECISION_LOCK, mp.workdps(ctx.working_digits):
        xv = mpf(x.numerator) / x.denominator if isinstance(x, Fraction) else mpf(x)
        if xv <= 0:
            raise DomainError(f"series requires x > 0, got {xv}")
        # When the decay model puts the stop point far beyond the term budget,
        # compute only a short genuine prefix for the partial report instead
        # of grinding out the whole doomed budget. Small budgets get a 2x + 300
        # margin because the model is crudest at small x; large budgets are the
        # expensive ones and the model tracks them well, so 1.35x + 300 there.
        run_limit = ctx.max_terms
        hopeless = None
        if isinstance(c, InnerCoefficients) and float(xv) < 1e15:
            predicted = required_terms_estimate(float(xv), ctx.digits + ctx.guard / 2)
            budget = ctx.max_terms
            cutoff = 2 * budget + 300 if budget <= 1000 else budget * 27 // 20 + 300
            if predicted > cutoff:
                run_limit = min(ctx.max_terms, 64)
                hopeless = (
                    f"roughly {predicted} terms needed at x={float(xv):g} for "
                    f"{ctx.digits} digits, beyond the {ctx.max_terms}-term budget"
                )
        eps = mpf(10) ** (-(ctx.digits + ctx.guard / 2))
        total = mpf(0)
        denom = xv if start_shift == AT_X else mpf(1)
        small_run = 0
        terms_used = 0
        stream = _coefficient_stream(c)
        stopped = False
        next_term = mpf(0)
        for k, ck in stream:
            denom *= xv + k
            term = _to_mpf(ck) / denom if ck else mpf(0)
            if (stopped := small_run >= ctx.stop_rule) or terms_used >= run_limit:
                next_term = term  # first omitted term, either way
                break
            total += term
            terms_used += 1
            if not term or abs(term) < eps * abs(total):
                small_run += 1
            else:
                small_run = 0
        else:  # finite coefficient list exhausted: series ends exactly
            stopped = True
            next_term = mpf(0)
        report = EvaluationReport(
            value=total,
            terms_used=terms_used,
            est_error=2 * abs(next_term),
            precision_used=ctx.working_digits,
            elapsed=time.perf_counter() - t0,
        )
    if not stopped:
        raise NonConvergenceError(
            hopeless
            or f"stop rule did not fire within {ctx.max_terms} terms "
            f"(x={float(xv):g} too small for {ctx.digits} digits?)",
            report,
        )
    return report


def verify_transform_consistency(
    a: InnerCoefficients, x, K: int, digits: int = 30
) -> ConsistencyReport:
    """Compare the K-term factorial series against the truncated inverse-power sum.

    For finite-support or numerically convergent inputs the two truncations
    must agree to roughly the size of the first omitted factorial term; used
    by property tests as an end-to-end check of the transformation.
    """
    if K < 1:
        raise DomainError(f"need K >= 1, got {K}")
    with _PRECISION_LOCK, mp.workdps(digits + 10):
        xv = mpf(x)
        denom = xv
        fact_sum = mpf(0)
        for k, ck in _transform_stream(a, K):
            denom *= xv + k
            if ck:
                fact_sum += _to_mpf(ck) / denom
        L = a.support_hint if a.support_hint is not None else K
        pow_sum = mpf(0)
        for l in range(1, L + 1):
            al = a(l)
            if al:
                pow_sum += _to_mpf(al) / xv ** (l + 1)
        return ConsistencyReport(
            factorial_sum=fact_sum,
            inverse_power_sum=pow_sum,
            difference=fact_sum - pow_sum,
        )
