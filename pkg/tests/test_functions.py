from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dichotomy.functions import (
    Budget,
    BudgetExhausted,
    Decided,
    Exhausted,
    LiftedFn,
    MonotoneFn,
    PointwiseFn,
    PreconditionFailed,
    SpanFn,
    Staircase,
    StepFn,
    lift,
)
from dichotomy.reals import ExactReal, RatInterval, dyadic, real_from_rational
from dichotomy.streams import ConvergentSeq, splice, BinarySeq

unit = st.fractions(min_value=0, max_value=1, max_denominator=256)


def test_step_boundary_convention():
    f = StepFn(Fraction(1, 3), -1, 1)
    assert f.value(Fraction(1, 3)) == 1
    assert f.value(Fraction(1, 3) - dyadic(40)) == -1


def test_staircase_values_and_enclosure():
    f = Staircase([(Fraction(1, 4), 1), (Fraction(3, 4), 2)], base=1, slope=1)
    assert f.value(Fraction(0)) == 1
    assert f.value(Fraction(1, 4)) == Fraction(9, 4)
    assert f.value(Fraction(1)) == 5
    iv = f.enclose(RatInterval(Fraction(0), Fraction(1, 2)), 10)
    assert iv.contains(1) and iv.contains(Fraction(5, 2))
    assert f.jump_points() == [Fraction(1, 4), Fraction(3, 4)]


def test_staircase_rejects_duplicate_breakpoints():
    with pytest.raises(ValueError):
        Staircase([(Fraction(1, 2), 1), (Fraction(1, 2), 1)])


@given(unit, st.integers(min_value=0, max_value=60))
def test_lifted_staircase_matches_rational_value(q, p):
    f = Staircase([(Fraction(1, 3), Fraction(1, 2))], slope=1)
    iv = lift(f).at(q, p, Budget())
    assert iv.contains(f.value(q)) and iv.width <= dyadic(p)


def test_lifted_at_irrational_like_point():
    # x = 1/3 approached by the sequence 1/3 + 2**-n, never exact
    xs = ConvergentSeq.geometric(Fraction(1, 3), 1, 1)
    x = splice(BinarySeq.zeros(), xs).limit_point
    f = lift(Staircase([], slope=2))
    assert f.evaluate(x, 30, Budget()).contains(Fraction(2, 3))


def test_lifted_jump_exhausts_budget():
    xs = ConvergentSeq.geometric(Fraction(1, 3), 1, 1)
    x = splice(BinarySeq.zeros(), xs).limit_point
    res = lift(StepFn(Fraction(1, 3), 0, 1)).eval(x, 4, Budget(max_precision=30))
    assert isinstance(res, Exhausted)
    assert res.deepest_precision == 30


def test_budget_counts_and_raises():
    b = Budget(max_queries=3, max_precision=10)
    b.spend(4)
    b.spend(6)
    assert b.diagnostics()["deepest_precision"] == 6
    with pytest.raises(BudgetExhausted):
        b.spend(11)
    b.spend(1)
    with pytest.raises(BudgetExhausted):
        b.spend(1)


def test_pointwise_fn():
    f = PointwiseFn(lambda q: q * q, lambda iv: iv * iv, label="sq")
    assert f.value(Fraction(3, 4)) == Fraction(9, 16)
    assert lift(f).at(Fraction(3, 4), 20, Budget()).contains(Fraction(9, 16))


def test_lipschitz_mode_needs_constant():
    with pytest.raises(ValueError):
        LiftedFn(StepFn(Fraction(1, 2), 0, 1), modulus_free=False)


def test_monotone_check_samples():
    inc = MonotoneFn(Staircase([], slope=1))
    inc.check_samples([Fraction(i, 10) for i in range(11)])
    bad = MonotoneFn(Staircase([], slope=-1))
    with pytest.raises(PreconditionFailed):
        bad.check_samples([Fraction(0), Fraction(1)])
    MonotoneFn(Staircase([], slope=-1), "decreasing").check_samples([Fraction(0), Fraction(1)])


def test_decreasing_view():
    dec = MonotoneFn(Staircase([(Fraction(1, 2), -1)]), "decreasing")
    inc = dec.increasing()
    assert inc.value(Fraction(3, 4)) == 1


def test_span_value_and_enclosure():
    g = MonotoneFn(StepFn(Fraction(1, 2), 0, 1))
    h = MonotoneFn(Staircase([], slope=1))
    f = SpanFn([(2, g), (Fraction(-1, 2), h)])
    assert f.value(Fraction(1, 2)) == Fraction(7, 4)
    assert f.enclose(RatInterval.point(Fraction(1, 4)), 20).contains(Fraction(-1, 8))


def test_span_with_real_coefficient():
    k = ExactReal(lambda p: RatInterval(Fraction(1, 3) - dyadic(p + 1), Fraction(1, 3) + dyadic(p + 1)))
    f = SpanFn([(k, MonotoneFn(Staircase([], slope=1)))])
    assert f.value(Fraction(1, 2)) is None
    assert f.enclose(RatInterval.point(Fraction(1, 2)), 30).contains(Fraction(1, 6))


def test_outcomes():
    assert Decided(1).decided
    assert not Exhausted("x").decided
    assert real_from_rational(1).exact == 1
