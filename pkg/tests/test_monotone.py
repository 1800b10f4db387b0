from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dichotomy.functions import Budget, Decided, MonotoneFn, PreconditionFailed, SpanFn, Staircase, StepFn
from dichotomy.monotone import (
    Point,
    Star,
    enumerate_discontinuities,
    eps_steps,
    one_sided_limit,
    span_discontinuities,
    span_one_sided_limit,
)
from dichotomy.reals import dyadic


def stair(*jumps, slope=0):
    return MonotoneFn(Staircase(list(jumps), slope=slope))


def near(iv, c, tol=dyadic(30)):
    return iv.widen(tol).contains(c)


def test_right_limit_at_continuity_point_is_witnessed():
    f = stair((Fraction(1, 2), Fraction(3, 5)))
    res = one_sided_limit(f, Fraction(1, 3), "right", 10)
    assert res.value.kind == "witnessed"
    assert res.value.value.approx(10).widen(dyadic(10)).contains(Fraction(0))


def test_limits_at_a_jump():
    f = stair((Fraction(1, 3), Fraction(3, 5)))
    right = one_sided_limit(f, Fraction(1, 3), "right", 10).value
    left = one_sided_limit(f, Fraction(1, 3), "left", 10).value
    assert right.value.approx(10).widen(dyadic(10)).contains(Fraction(3, 5))
    assert left.kind == "sampled"
    assert left.value.approx(10).widen(dyadic(10)).contains(0)


def test_left_limit_without_sampling_is_exhausted():
    f = stair((Fraction(1, 3), Fraction(3, 5)))
    res = one_sided_limit(f, Fraction(1, 3), "left", 10, sampled=False)
    assert not res.decided
    lo, hi = (Fraction(v) for v in res.extra["bracket"])
    assert lo <= 0 <= hi


def test_identity_limits():
    f = stair(slope=1)
    for side in ("left", "right"):
        v = one_sided_limit(f, Fraction(1, 2), side, 12).value.value
        assert v.approx(12).widen(dyadic(12)).contains(Fraction(1, 2))


def test_decreasing_limit():
    f = MonotoneFn(Staircase([(Fraction(1, 2), -1)]), "decreasing")
    v = one_sided_limit(f, Fraction(1, 2), "left", 8).value.value
    assert v.approx(8).widen(dyadic(8)).contains(0)


def test_span_limit():
    g = stair((Fraction(1, 2), 1))
    h = stair(slope=1)
    f = SpanFn([(2, g), (-1, h)])
    iv = span_one_sided_limit(f, Fraction(1, 2), "right", 8).value
    assert iv.widen(dyadic(7)).contains(Fraction(3, 2))


def three_jumps(rng):
    cs = sorted(rng.sample(range(1, 64), 3))
    sizes = [Fraction(rng.randint(1, 4), 4) for _ in cs]
    return [(Fraction(c, 64) + Fraction(1, 3 * 64), s) for c, s in zip(cs, sizes)]


@pytest.mark.parametrize("seed", range(4))
def test_eps_steps_finds_every_large_jump(seed):
    rng = random.Random(seed)
    jumps = three_jumps(rng)
    f = stair(*jumps, slope=Fraction(1, 8))
    eps = Fraction(1, 4)
    part = eps_steps(f, eps, Budget()).value
    cands = part.step_candidates()
    for c, s in jumps:
        assert any(near(pt.enclosure, c) for pt in cands)
    for lo, hi in part.open_intervals():
        for _ in range(50):
            a = lo + (hi - lo) * Fraction(rng.randint(1, 999), 1000)
            b = lo + (hi - lo) * Fraction(rng.randint(1, 999), 1000)
            assert abs(f.value(a) - f.value(b)) <= eps


def test_continuous_fixture_has_no_candidates():
    part = eps_steps(stair(slope=1), Fraction(1, 8)).value
    assert part.step_candidates() == []
    assert part.points[0].enclosure.contains(0) and part.points[-1].enclosure.contains(1)


def test_eps_steps_rejects_sampled_non_monotone():
    with pytest.raises(PreconditionFailed):
        eps_steps(MonotoneFn(Staircase([], slope=-1)), Fraction(1, 4))


def points(entries):
    return [e for e in entries if isinstance(e, Point)]


def test_single_jump_enumeration():
    entries = enumerate_discontinuities(stair((Fraction(1, 3), 1)), None, max_level=4).value
    pts = points(entries)
    assert len(pts) == 1
    assert near(pts[0].enclosure, Fraction(1, 3))
    assert pts[0].gap_lower == Fraction(1, 4) and pts[0].level == 1


def test_enumeration_levels():
    jumps = [(Fraction(1, 5), Fraction(1, 2)), (Fraction(3, 7), Fraction(1, 8)), (Fraction(5, 6), Fraction(1, 32))]
    entries = enumerate_discontinuities(stair(*jumps), None, max_level=6).value
    pts = points(entries)
    # a jump s is listed at the first level k with s above 3 * 2**-(k+2)
    assert sorted(p.level for p in pts) == [1, 3, 5]
    for c, s in jumps:
        (match,) = [p for p in pts if near(p.enclosure, c)]
        assert match.gap_lower < s


def test_continuous_enumeration_is_all_star():
    entries = enumerate_discontinuities(stair(slope=1), 30).value
    assert len(entries) == 30 and all(isinstance(e, Star) for e in entries)


def test_span_cancellation_is_all_star():
    g = stair((Fraction(1, 2), 1), slope=1)
    f = SpanFn([(1, g), (-1, g)])
    entries = span_discontinuities(f, 20, max_level=5).value
    assert all(isinstance(e, Star) for e in entries)


def test_span_difference_finds_both_jumps():
    g = stair((Fraction(1, 3), 1))
    h = stair((Fraction(2, 3), Fraction(1, 2)), slope=1)
    f = SpanFn([(1, g), (-1, h)])
    pts = points(span_discontinuities(f, None, max_level=4).value)
    assert len(pts) == 2
    assert any(near(p.enclosure, Fraction(1, 3)) for p in pts)
    assert any(near(p.enclosure, Fraction(2, 3)) for p in pts)


@settings(max_examples=8)
@given(st.lists(st.tuples(st.integers(1, 31), st.integers(0, 5)), min_size=1, max_size=3,
                unique_by=lambda t: t[0]))
def test_enumeration_sound_and_complete(spec):
    jumps = [(Fraction(2 * c + 1, 64), dyadic(e)) for c, e in spec]
    top = 5
    pts = points(enumerate_discontinuities(stair(*jumps), None, max_level=top).value)
    # soundness: every Point is at a true jump
    for p in pts:
        assert any(near(p.enclosure, c) for c, _ in jumps)
    # completeness: jumps larger than 2**-top are listed, once
    for c, s in jumps:
        hits = [p for p in pts if near(p.enclosure, c)]
        if s > dyadic(top):
            assert len(hits) == 1
        assert len(hits) <= 1
