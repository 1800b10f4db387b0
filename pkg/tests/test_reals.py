from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dichotomy.reals import (
    ExactReal,
    PrecisionLimitError,
    RatInterval,
    Side,
    Sign,
    arith,
    dyadic,
    lower_bound_bits,
    real_from_rational,
    sign_or_small,
    split,
)

rationals = st.fractions(min_value=-8, max_value=8, max_denominator=64)
precisions = st.integers(min_value=0, max_value=96)


def sqrt2() -> ExactReal:
    """Bisection for sqrt(2): an independent irrational test value."""

    def approx(p: int) -> RatInterval:
        lo, hi = Fraction(1), Fraction(2)
        while hi - lo > dyadic(p):
            mid = (lo + hi) / 2
            if mid * mid < 2:
                lo = mid
            else:
                hi = mid
        return RatInterval(lo, hi)

    return ExactReal(approx)


def test_interval_rejects_reversed_bounds():
    with pytest.raises(ValueError):
        RatInterval(Fraction(1), Fraction(0))


def test_interval_multiplication_sign_cases():
    a = RatInterval(Fraction(-1), Fraction(2))
    b = RatInterval(Fraction(-3), Fraction(1))
    assert a * b == RatInterval(Fraction(-6), Fraction(3))


def test_abs_of_straddling_interval():
    assert abs(RatInterval(Fraction(-1), Fraction(1, 2))) == RatInterval(Fraction(0), Fraction(1))


@given(rationals, rationals, precisions)
def test_binary_ops_contain_exact_value(a, b, p):
    x, y = real_from_rational(a), real_from_rational(b)
    for op, expected in (("add", a + b), ("sub", a - b), ("mul", a * b),
                         ("min", min(a, b)), ("max", max(a, b))):
        iv = arith(op, x, y).approx(p)
        assert iv.contains(expected)
        assert iv.width <= dyadic(p)


@given(precisions)
def test_irrational_arithmetic_width_and_containment(p):
    s = sqrt2()
    sq = (s * s).approx(p)
    assert sq.contains(2) and sq.width <= dyadic(p)
    diff = (s - s).approx(p)
    assert diff.contains(0)


def test_sqrt2_digits_frozen():
    # sqrt(2) = 1.41421356237309...
    iv = sqrt2().approx(40)
    assert Fraction(141421356237, 10**11) < iv.lo and iv.hi < Fraction(141421356238, 10**11)


def test_approximations_are_memoized():
    calls = []

    def approx(p):
        calls.append(p)
        return RatInterval.point(Fraction(1, 3))

    x = ExactReal(approx)
    x.approx(5)
    x.approx(5)
    assert calls == [5]


def test_overwide_approximation_is_rejected():
    x = ExactReal(lambda p: RatInterval(Fraction(0), Fraction(1)))
    with pytest.raises(AssertionError):
        x.approx(3)


def test_precision_cap_raises():
    s = sqrt2()
    with pytest.raises(PrecisionLimitError):
        arith("add", s, s, max_precision=4).approx(10)


@given(rationals, st.fractions(min_value=Fraction(1, 1024), max_value=4, max_denominator=1024))
def test_split_answers_are_sound(x, gap):
    a = Fraction(0)
    b = gap
    side = split(real_from_rational(x), a, b)
    if side is Side.BELOW:
        assert x < b
    else:
        assert x > a


def test_split_examples():
    assert split(real_from_rational(Fraction(1, 3)), Fraction(1, 4), Fraction(1, 2)) in (Side.ABOVE, Side.BELOW)
    assert split(real_from_rational(0), Fraction(1, 4), Fraction(1, 2)) is Side.BELOW
    assert split(real_from_rational(1), Fraction(1, 4), Fraction(1, 2)) is Side.ABOVE
    with pytest.raises(ValueError):
        split(real_from_rational(0), 1, 1)


@given(rationals, st.fractions(min_value=Fraction(1, 512), max_value=2, max_denominator=512))
def test_sign_or_small_is_sound(x, eps):
    s = sign_or_small(real_from_rational(x), eps)
    if s is Sign.POSITIVE:
        assert x > eps / 4
    elif s is Sign.NEGATIVE:
        assert x < -eps / 4
    else:
        assert abs(x) < eps / 2


def test_lower_bound_bits():
    assert lower_bound_bits(real_from_rational(Fraction(1, 8))) == 4
    assert lower_bound_bits(real_from_rational(1)) == 1
    assert lower_bound_bits(real_from_rational(0), 20) is None
    assert lower_bound_bits(real_from_rational(-1), 20) is None
