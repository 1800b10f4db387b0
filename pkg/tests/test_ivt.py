from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dichotomy.functions import Budget, Decided, PointwiseFn, PreconditionFailed, Staircase, StepFn
from dichotomy.ivt import (
    AllRationalsAtLeast,
    Candidate,
    Root,
    RootAtRational,
    RootBelowEps,
    Stuck,
    approx_root,
    approx_root_rational,
    root_or_all_large,
    unit_rationals,
)
from dichotomy.reals import dyadic
from dichotomy.streams import AllZero, bounded_search_oracle, fixture_oracle


def oracle_bisection(value, eps):
    """Independent exact bisection with the same classification thresholds:
    small iff |f(m)| <= 3 eps / 4 for a rational-valued f."""
    a, b = Fraction(0), Fraction(1)
    for q in (a, b):
        if abs(value(q)) <= 3 * eps / 4:
            return q
    sign = 1 if value(a) < 0 else -1
    for _ in range(200):
        m = (a + b) / 2
        v = sign * value(m)
        if abs(v) <= 3 * eps / 4:
            return m
        if v < 0:
            a = m
        else:
            b = m
    raise AssertionError("no small midpoint")


def linear(c):
    return Staircase([], base=-c, slope=1)


def test_frozen_root_of_shifted_identity():
    # oracle_bisection(lambda q: q - 1/3, 1/1000) == 171/512
    res = approx_root(linear(Fraction(1, 3)), Fraction(1, 1000))
    assert isinstance(res, Decided) and isinstance(res.value, Root)
    assert res.value.point == Fraction(171, 512)
    assert oracle_bisection(lambda q: q - Fraction(1, 3), Fraction(1, 1000)) == Fraction(171, 512)


@given(st.fractions(min_value=Fraction(1, 100), max_value=Fraction(99, 100), max_denominator=100),
       st.integers(min_value=4, max_value=20))
def test_root_agrees_with_oracle_and_is_small(c, k):
    eps = dyadic(k)
    res = approx_root(linear(c), eps)
    r = res.value
    assert isinstance(r, Root)
    if r.point is not None:
        assert r.point == oracle_bisection(lambda q: q - c, eps)
        assert abs(r.point - c) < eps


def test_decreasing_function_root():
    f = Staircase([], base=Fraction(1, 2), slope=-1)
    r = approx_root(f, Fraction(1, 100)).value
    assert isinstance(r, Root) and abs(r.point - Fraction(1, 2)) < Fraction(1, 100)


def test_endpoint_root():
    r = approx_root(Staircase([], slope=1), Fraction(1, 10)).value
    assert r.point == 0


def test_same_sign_is_a_precondition_failure():
    with pytest.raises(PreconditionFailed):
        approx_root(Staircase([], base=1, slope=1), Fraction(1, 10))


@pytest.mark.parametrize("c", [Fraction(1, 3), Fraction(1, 7), Fraction(5, 11)])
def test_step_gives_evidence(c):
    eps = Fraction(1, 2)
    res = approx_root(StepFn(c, -1, 1), eps, Budget(max_precision=40))
    assert isinstance(res.value, Stuck)
    ev = res.value.evidence
    assert ev.z.approx(38).widen(dyadic(38)).contains(c)
    assert all(iv.hi < -eps / 8 for _, iv in ev.products)


def test_trace_invariant_on_step():
    eps = Fraction(1, 2)
    res = approx_root(StepFn(Fraction(1, 3), -1, 1), eps, Budget(max_precision=30))
    for s in res.value.trace:
        if s.lam == 0:
            assert s.fa.hi < -eps / 2 and s.fb.lo > eps / 2
            assert s.b - s.a <= dyadic(s.n)


def test_rational_variant():
    assert isinstance(approx_root_rational(linear(Fraction(1, 4)), Fraction(1, 10), 20), RootAtRational)
    cand = approx_root_rational(StepFn(Fraction(1, 3), -1, 1), Fraction(1, 2), 20)
    assert isinstance(cand, Candidate)
    assert cand.a < Fraction(1, 3) <= cand.b and cand.b - cand.a <= dyadic(20)


def test_unit_rationals_prefix():
    assert [unit_rationals(n) for n in range(1, 9)] == [
        0, 1, Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(1, 4), Fraction(3, 4), Fraction(1, 5)]


def test_root_or_all_large_root_branch():
    res = root_or_all_large(linear(Fraction(1, 3)), Fraction(1, 10), bounded_search_oracle(10))
    assert isinstance(res.value, RootBelowEps)


def test_root_or_all_large_universal_branch_with_fixture():
    f = StepFn(Fraction(1, 3), -1, 1)
    res = root_or_all_large(f, Fraction(1, 2), fixture_oracle(AllZero(), 40), budget=Budget(max_precision=30))
    assert isinstance(res.value, AllRationalsAtLeast)
    assert res.value.certified_lower == Fraction(1, 4)


def test_root_or_all_large_bounded_oracle_exhausts_on_universal_branch():
    f = StepFn(Fraction(1, 3), -1, 1)
    res = root_or_all_large(f, Fraction(1, 2), bounded_search_oracle(40), budget=Budget(max_precision=30))
    assert not res.decided


def test_pointwise_quadratic_root():
    f = PointwiseFn(lambda q: q * q - Fraction(1, 2), lambda iv: iv * iv - type(iv).point(Fraction(1, 2)))
    r = approx_root(f, dyadic(20)).value
    assert isinstance(r, Root)
    z = r.point
    assert abs(z * z - Fraction(1, 2)) < dyadic(20)
