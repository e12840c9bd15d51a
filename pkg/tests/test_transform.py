import math
import time
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf

from stirlingsum.exactnum import DomainError, bernoulli, gregory_number
from stirlingsum.transform import (
    AT_X,
    AT_X_PLUS_1,
    EvalContext,
    InnerCoefficients,
    NonConvergenceError,
    StirlingCoefficients,
    eval_stirling_series,
    pochhammer,
    required_terms_estimate,
    verify_transform_consistency,
    weniger_transform,
)

HARMONIC_TAIL = InnerCoefficients(fn=lambda l: -bernoulli(l + 1) / (l + 1))
ZERO = InnerCoefficients(fn=lambda l: F(0), support_hint=1)
UNIT = InnerCoefficients(fn=lambda l: F(1) if l == 1 else F(0), support_hint=1)


def test_harmonic_tail_printed_coefficients():
    c = weniger_transform(HARMONIC_TAIL, 4)
    assert list(c.values) == [F(-1, 12), F(-1, 12), F(-19, 120), F(-9, 20)]


def test_zero_input_transforms_to_zero():
    assert all(v == 0 for v in weniger_transform(ZERO, 12).values)


def test_single_leading_coefficient_gives_factorials():
    c = weniger_transform(UNIT, 8)
    assert list(c.values) == [F(math.factorial(k - 1)) for k in range(1, 9)]


def test_harmonic_tail_relates_to_reciprocal_log_numbers():
    # c_k = (-1)^(k+1) k! C_(k+1): two independently coded generators agree.
    c = weniger_transform(HARMONIC_TAIL, 10)
    for k in range(1, 11):
        assert c.values[k - 1] == (-1) ** (k + 1) * math.factorial(k) * gregory_number(k + 1)


@settings(max_examples=25, deadline=None)
@given(
    st.lists(st.integers(-9, 9), min_size=1, max_size=8),
    st.lists(st.integers(-9, 9), min_size=1, max_size=8),
    st.integers(-5, 5),
    st.integers(-5, 5),
)
def test_transform_is_linear(xs, ys, alpha, beta):
    n = max(len(xs), len(ys))
    xs = xs + [0] * (n - len(xs))
    ys = ys + [0] * (n - len(ys))
    a = InnerCoefficients(fn=lambda l: F(xs[l - 1]), support_hint=n)
    b = InnerCoefficients(fn=lambda l: F(ys[l - 1]), support_hint=n)
    combo = InnerCoefficients(
        fn=lambda l: F(alpha * xs[l - 1] + beta * ys[l - 1]), support_hint=n
    )
    K = n + 4
    ca, cb, cc = (weniger_transform(s, K) for s in (a, b, combo))
    for k in range(K):
        assert cc.values[k] == alpha * ca.values[k] + beta * cb.values[k]


def test_pochhammer_values():
    assert pochhammer(5, 0) == 1
    assert pochhammer(1, 5) == 120
    assert pochhammer(F(1, 2), 3) == F(15, 8)
    with mp.workdps(30):
        assert abs(pochhammer(mpf(2), 4) - 120) < mpf(10) ** -25
    with pytest.raises(DomainError):
        pochhammer(3, -1)


def test_denominator_recursion_matches_pochhammer():
    # D_k for the at_x shape is x(x+1)...(x+k) = pochhammer(x, k+1).
    x = F(7, 2)
    d = x
    for k in range(1, 51):
        d *= x + k
        assert d == pochhammer(x, k + 1)


def test_eval_inverse_square_via_unit_coefficients():
    # sum_k (k-1)! / (x(x+1)...(x+k)) telescopes to 1/x^2.
    rep = eval_stirling_series(UNIT, 20, AT_X, EvalContext(digits=25))
    with mp.workdps(35):
        assert abs(rep.value - mpf(1) / 400) < mpf(10) ** -23
    assert rep.terms_used <= 300


def test_eval_zero_series_stops_immediately():
    ctx = EvalContext(digits=20)
    rep = eval_stirling_series(ZERO, 15, AT_X, ctx)
    assert rep.value == 0
    assert rep.terms_used <= ctx.stop_rule
    assert rep.est_error == 0


def test_eval_harmonic_tail_against_direct_sum():
    # At x = digits + 10 the factorial terms decay fast enough for full
    # precision within a few hundred terms.
    ctx = EvalContext(digits=30)
    rep = eval_stirling_series(HARMONIC_TAIL, 40, AT_X, ctx)
    with mp.workdps(50):
        lhs = mp.fsum(mpf(1) / k for k in range(1, 41))
        target = lhs - mp.log(40) - mp.euler - mpf(1) / 80
        assert abs(rep.value - target) < mpf(10) ** -29


def test_eval_reports_first_omitted_term_estimate():
    rep = eval_stirling_series(HARMONIC_TAIL, 40, AT_X, EvalContext(digits=25))
    # estimate must be positive and far below the requested precision
    assert rep.est_error > 0
    assert rep.est_error < mpf(10) ** -25
    assert rep.precision_used >= 35
    assert rep.elapsed >= 0


def test_eval_nonconvergence_carries_partial_report():
    ctx = EvalContext(digits=30, max_terms=8)
    with pytest.raises(NonConvergenceError) as exc:
        eval_stirling_series(HARMONIC_TAIL, 10, AT_X, ctx)
    rep = exc.value.report
    assert rep.terms_used == 8
    assert rep.est_error > 0
    # the 8-term partial sum is still a decent approximation
    with mp.workdps(45):
        lhs = mp.fsum(mpf(1) / k for k in range(1, 11))
        target = lhs - mp.log(10) - mp.euler - mpf(1) / 20
        assert abs(rep.value - target) < 2 * rep.est_error


def test_eval_rejects_bad_arguments():
    with pytest.raises(DomainError):
        eval_stirling_series(UNIT, -3, AT_X, EvalContext())
    with pytest.raises(DomainError):
        eval_stirling_series(UNIT, 10, "at_x_plus_2", EvalContext())
    with pytest.raises(DomainError):
        EvalContext(digits=0)
    with pytest.raises(DomainError):
        EvalContext(digits=10, guard=5)
    with pytest.raises(DomainError):
        EvalContext(stop_rule=1)


def test_eval_at_x_plus_1_shape():
    # sum_k c_k/((x+1)...(x+k)) with unit inner coefficients: multiply the
    # telescoped identity by x, so the value is 1/x.
    rep = eval_stirling_series(UNIT, 20, AT_X_PLUS_1, EvalContext(digits=25))
    with mp.workdps(35):
        assert abs(rep.value - mpf(1) / 20) < mpf(10) ** -23


def test_finite_support_truncations_agree():
    a = InnerCoefficients(
        fn=lambda l: [F(1), F(-2, 3), F(5)][l - 1] if l <= 3 else F(0),
        support_hint=3,
    )
    for x in (20, 35):
        for K in (3, 10, 25, 40):
            r = verify_transform_consistency(a, x, K, digits=30)
            # bound by twice the first omitted factorial term
            tail_ctx = EvalContext(digits=30, max_terms=K)
            with pytest.raises(NonConvergenceError) as exc:
                eval_stirling_series(a, x, AT_X, tail_ctx)
            assert abs(r.difference) <= 2 * exc.value.report.est_error + mpf(10) ** -28


def test_consistency_report_zero_for_zero_input():
    r = verify_transform_consistency(ZERO, 50, 6, digits=30)
    assert r.difference == 0


def test_consistency_harmonic_and_unit_examples():
    r = verify_transform_consistency(HARMONIC_TAIL, 50, 40, digits=30)
    assert abs(r.difference) < mpf(10) ** -20
    # K = 80 pushes the factorial-side truncation tail below 1e-29 at x = 30
    r2 = verify_transform_consistency(UNIT, 30, 80, digits=30)
    assert abs(r2.difference) < mpf(10) ** -25


def test_stirling_coefficients_container():
    c = StirlingCoefficients(values=(F(1), F(-2)))
    assert len(c) == 2 and c[1] == F(-2)
    rep = eval_stirling_series(c, 25, AT_X, EvalContext(digits=20))
    with mp.workdps(30):
        direct = mpf(1) / (25 * 26) - mpf(2) / (25 * 26 * 27)
        assert abs(rep.value - direct) < mpf(10) ** -24


# ---------------------------------------------------------------------------
# Coefficient caching and depth pre-flight
# ---------------------------------------------------------------------------


def test_repeated_transforms_replay_cached_coefficients():
    calls = []

    def fn(l):
        calls.append(l)
        return F(1, l * l + 1)

    a = InnerCoefficients(fn=fn)
    weniger_transform(a, 40)
    baseline = len(calls)
    again = weniger_transform(a, 40)
    assert len(calls) == baseline  # replayed from cache, not recomputed
    deeper = weniger_transform(a, 70)
    assert len(calls) == baseline + 30  # resumed from the cached prefix
    fresh = weniger_transform(InnerCoefficients(fn=lambda l: F(1, l * l + 1)), 70)
    assert list(deeper.values) == list(fresh.values)
    assert list(again.values) == list(fresh.values)[:40]


def test_checkpoint_resume_past_cache_cap_stays_exact():
    # the cache keeps a bounded prefix; resuming beyond it must recompute
    # the uncached tail rather than splice mismatched state
    a = InnerCoefficients(fn=lambda l: F(1) if l == 1 else F(0), support_hint=1)
    deep = weniger_transform(a, 520)
    again = weniger_transform(a, 526)
    fresh = weniger_transform(
        InnerCoefficients(fn=lambda l: F(1) if l == 1 else F(0), support_hint=1), 526
    )
    assert list(again.values) == list(fresh.values)
    assert list(deep.values) == list(fresh.values)[:520]


def test_required_terms_estimate_brackets_the_decay_target():
    for x, digits in [(50, 30), (110, 100), (40, 60), (2010, 2000)]:
        k = required_terms_estimate(x, digits)
        target = -digits * math.log(10)

        def log_term(kk):
            return math.lgamma(kk) + math.lgamma(x) - math.lgamma(x + kk + 1)

        # returned count reaches the target, and only just: a few steps
        # (the bisection's documented slack) back above it
        assert log_term(k) <= target
        slack = 3 + k // 250
        assert log_term(k - slack) > target
    # pushing the anchor out always cheapens the tail
    assert required_terms_estimate(1000, 200) < required_terms_estimate(100, 200)


def test_hopeless_depth_bails_with_short_genuine_prefix():
    # when far more terms are needed than the budget allows, the evaluator
    # refuses after a short prefix instead of grinding out the whole budget
    t0 = time.perf_counter()
    with pytest.raises(NonConvergenceError) as exc:
        eval_stirling_series(HARMONIC_TAIL, 15, AT_X, EvalContext(digits=500))
    assert time.perf_counter() - t0 < 10.0
    rep = exc.value.report
    assert 1 <= rep.terms_used <= 64
    assert "beyond the" in str(exc.value)
    # the short prefix is a genuine partial sum: a run capped at the same
    # term count lands on the identical value
    with pytest.raises(NonConvergenceError) as exc2:
        eval_stirling_series(
            HARMONIC_TAIL, 15, AT_X, EvalContext(digits=500, max_terms=rep.terms_used)
        )
    assert exc2.value.report.terms_used == rep.terms_used
    assert exc2.value.report.value == rep.value


def test_small_budgets_are_exempt_from_the_bail_heuristic():
    # tight explicit budgets are often deliberate truncation probes; they
    # must run their full length even when the depth looks hopeless
    with pytest.raises(NonConvergenceError) as exc:
        eval_stirling_series(HARMONIC_TAIL, 20, AT_X, EvalContext(digits=80, max_terms=12))
    assert exc.value.report.terms_used == 12
