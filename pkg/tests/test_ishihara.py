from __future__ import annotations

from fractions import Fraction

import pytest

from dichotomy.functions import Budget, RationalFn, Staircase, StepFn
from dichotomy.ishihara import (
    AllBelow,
    EventuallyBelow,
    InfinitelyOften,
    WitnessAbove,
    tail_schedule,
    trick_one,
    trick_two,
)
from dichotomy.reals import RatInterval, dyadic
from dichotomy.streams import AllZero, OracleMismatch, ConvergentSeq, FirstOneAt, bounded_search_oracle, fixture_oracle


class Counting(RationalFn):
    """Wrapper recording every rational point evaluated."""

    def __init__(self, base):
        self.base = base
        self.seen = []

    def value(self, q):
        self.seen.append(q)
        return self.base.value(q)

    def enclose(self, iv, p):
        self.seen.append(iv)
        return self.base.enclose(iv, p)


def sup_distance(f, xs_points, x):
    return max(abs(f.value(q) - f.value(x)) for q in xs_points)


def test_lipschitz_fixture_all_below():
    f = Staircase([], slope=1)
    xs = ConvergentSeq.geometric(Fraction(1, 4), Fraction(1, 8), 1)
    # tested distances are 2**-(n+3), supremum 1/16
    sup = sup_distance(f, [Fraction(1, 4) + dyadic(n + 3) for n in range(1, 40)], Fraction(1, 4))
    res = trick_one(f, xs, Fraction(1, 16), Fraction(1, 8))
    assert sup < Fraction(1, 8)
    assert res.value == AllBelow(Fraction(1, 8))


def test_identity_with_large_first_distance_gives_witness():
    # d_1 = 1/2 > alpha = 1/4, so only the witness branch is sound
    f = Staircase([], slope=1)
    res = trick_one(f, ConvergentSeq.geometric(Fraction(1, 4), 1, 1), Fraction(1, 4), Fraction(1, 2))
    w = res.value
    assert isinstance(w, WitnessAbove) and w.n == 1
    assert w.distance.lo > Fraction(1, 4)


def test_gap_fixture_witness_is_reverified():
    f = StepFn(Fraction(1, 2), 0, 1)
    xs = ConvergentSeq.geometric(Fraction(1, 2), Fraction(1, 4), -1)
    w = trick_one(f, xs, Fraction(1, 4), Fraction(1, 2)).value
    assert isinstance(w, WitnessAbove)
    q = Fraction(1, 2) - Fraction(1, 4) * dyadic(w.n)
    assert abs(f.value(q) - f.value(Fraction(1, 2))) > w.certified_gap > Fraction(1, 4)


def test_negative_alpha_shortcut_evaluates_nothing():
    f = Counting(Staircase([], slope=1))
    res = trick_one(f, ConvergentSeq.geometric(0, 1, 1), Fraction(-1), Fraction(1))
    assert res.value == WitnessAbove(1, Fraction(0))
    assert f.seen == []


def test_alpha_must_be_below_beta():
    with pytest.raises(ValueError):
        trick_one(Staircase([], slope=1), ConvergentSeq.geometric(0, 1, 1), 1, 1)


def test_tail_schedule():
    assert tail_schedule(4) == [1, 2, 4, 8]


def test_trick_two_eventually_below():
    f = Staircase([], slope=2)
    xs = ConvergentSeq.geometric(Fraction(1, 2), Fraction(1, 2), 1)
    res = trick_two(f, xs, Fraction(1, 10), bounded_search_oracle(20))
    assert isinstance(res.value, EventuallyBelow)
    n = res.value.N
    # every distance from index N on is 2**-n and below 1/10
    assert all(2 * Fraction(1, 2) * dyadic(k) < Fraction(1, 10) for k in range(n + 2, n + 40))


def test_trick_two_infinitely_often_with_fixture():
    f = StepFn(Fraction(1, 3), 0, 1)
    xs = ConvergentSeq.geometric(Fraction(1, 3), Fraction(1, 4), -1)
    res = trick_two(f, xs, Fraction(1, 2), fixture_oracle(AllZero(), 4))
    assert isinstance(res.value, InfinitelyOften)
    idx = res.value.evidence.take(5)
    assert idx == [1, 2, 3, 4, 5]
    assert res.value.evidence.certificate(3).lo >= Fraction(1, 2)


def test_trick_two_bounded_oracle_exhausts_on_jump():
    f = StepFn(Fraction(1, 3), 0, 1)
    xs = ConvergentSeq.geometric(Fraction(1, 3), Fraction(1, 4), -1)
    res = trick_two(f, xs, Fraction(1, 2), bounded_search_oracle(4))
    assert not res.decided


def test_trick_two_fixture_first_one():
    f = Staircase([], slope=2)
    xs = ConvergentSeq.geometric(Fraction(1, 2), Fraction(1, 2), 1)
    # tail k has distances 2**-n for n >= k; k = 4 is the first all below
    res = trick_two(f, xs, Fraction(1, 10), fixture_oracle(FirstOneAt(4), 4), tails=0)
    assert res.value == EventuallyBelow(4)
    with pytest.raises(OracleMismatch):
        trick_two(f, xs, Fraction(1, 10), fixture_oracle(FirstOneAt(1), 4), tails=0)
