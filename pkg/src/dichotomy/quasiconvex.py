"""Positive infimum or infimum zero for positive quasi-convex functions whose
infimum over every subinterval can be approximated, plus a sampled
quasi-convexity checker and spike fixtures.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

from .functions import (
    Budget,
    BudgetExhausted,
    Decided,
    Exhausted,
    LiftedFn,
    Outcome,
    PreconditionFailed,
    RationalFn,
    RealFn,
    as_real_fn,
)
from .reals import (
    ExactReal,
    RatInterval,
    RationalLike,
    Side,
    as_rational,
    dyadic,
    real_from_rational,
    split,
)
from .streams import BinarySeq, ConvergentSeq, SeparatedSeqFixture, splice

UNIT = RatInterval(Fraction(0), Fraction(1))


# -- infimum oracles --------------------------------------------------------


@dataclass(frozen=True)
class InfOracle:
    """``inf_approx(I, p)`` is within ``2**-p`` of the infimum of ``f`` on ``I``."""

    inf_approx: Callable[[RatInterval, int], Fraction]
    label: str = "inf"

    def as_real(self, iv: RatInterval, budget: Optional[Budget] = None) -> ExactReal:
        def approx(p: int) -> RatInterval:
            if budget is not None:
                budget.spend(p + 1)
            return RatInterval.around(self.inf_approx(iv, p + 1), dyadic(p + 1))

        return ExactReal(approx)


def closed_form_oracle(inf_exact: Callable[[RatInterval], Fraction], label: str = "inf") -> InfOracle:
    """Oracle from an exact rational infimum formula."""
    return InfOracle(lambda iv, p: inf_exact(iv), label)


def quadratic_oracle(centre: RationalLike, floor: RationalLike) -> InfOracle:
    """Infimum of ``(x - centre)**2 + floor``."""
    c, k = as_rational(centre), as_rational(floor)

    def inf(iv: RatInterval) -> Fraction:
        d = max(Fraction(0), iv.lo - c, c - iv.hi)
        return k + d * d

    return closed_form_oracle(inf, f"inf (x-{c})^2+{k}")


def lipschitz_oracle(f: RationalFn, lipschitz: RationalLike) -> InfOracle:
    """Grid infimum with Lipschitz slack for a rational-point function."""
    lip = as_rational(lipschitz)

    def inf(iv: RatInterval, p: int) -> Fraction:
        if iv.width == 0 or lip == 0:
            return f.eval_q(iv.lo).approx(p + 2).mid
        # grid spacing h with lip*h/2 <= 2**-(p+2)
        n = 1
        while lip * iv.width / n / 2 > dyadic(p + 2):
            n *= 2
        h = iv.width / n
        best = min(f.eval_q(iv.lo + i * h).approx(p + 2).mid for i in range(n + 1))
        return best - lip * h / 4

    return InfOracle(inf, f"grid inf {f.label}")


def enclosure_oracle(f: RationalFn, max_boxes: int = 20000) -> InfOracle:
    """Branch and bound on the interval extension of ``f``.

    Boxes are refined in order of their lower bound; the best point value
    seen is the upper bound.  Gives up with :class:`BudgetExhausted` after
    ``max_boxes`` refinements.
    """

    def inf(iv: RatInterval, p: int) -> Fraction:
        target = dyadic(p)

        def point(q: Fraction) -> Fraction:
            return f.enclose(RatInterval.point(q), p + 2).mid

        upper = min(point(iv.lo), point(iv.hi), point(iv.mid))
        heap = [(f.enclose(iv, p + 2).lo, iv.lo, iv.hi)]
        for _ in range(max_boxes):
            lo, a, b = heapq.heappop(heap)
            if upper - lo <= target:
                return (lo + upper) / 2 if upper >= lo else upper
            m = (a + b) / 2
            upper = min(upper, point(m))
            for u, v in ((a, m), (m, b)):
                heapq.heappush(heap, (f.enclose(RatInterval(u, v), p + 2).lo, u, v))
        raise BudgetExhausted("infimum search exceeded its box limit",
                              {"queries": max_boxes, "deepest_precision": p,
                               "last_candidate": str(upper)})

    return InfOracle(inf, f"bnb inf {f.label}")


# -- results ------------------------------------------------------------------


@dataclass(frozen=True)
class InfStep:
    n: int
    interval: RatInterval
    mid: Fraction
    f_mid: RatInterval
    inf_left: RatInterval
    inf_right: RatInterval
    branch: str  # "left" | "right" | "stop"


@dataclass(frozen=True)
class InfPositive:
    lower: Fraction
    witness_mid: ExactReal
    trace: tuple[InfStep, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class InfZeroEvidence:
    """Points approaching ``z`` with values below ``2**-n``.

    ``value_at_z`` is the certified positive value of ``f`` at ``z`` when
    ``f`` could be evaluated there; it is None when ``f`` is not defined
    (not evaluable) at ``z``, in which case the zero branch rests on the
    thresholds scanned up to the precision budget.
    """

    z: ExactReal
    approach: ConvergentSeq
    values: tuple[tuple[int, Fraction, RatInterval], ...]
    value_at_z: Optional[RatInterval]
    trace: tuple[InfStep, ...] = field(default=(), repr=False)


InfResult = Union[InfPositive, InfZeroEvidence]


class QuasiConvexityViolated(PreconditionFailed):
    """Both half-interval infima fell below the midpoint value."""


# -- the dichotomy --------------------------------------------------------------


def _positive_value(f: RealFn, q: Fraction, p: int, budget: Budget) -> RatInterval:
    """``f(q)`` to a precision where ``0 < lo`` and ``hi < 2*lo``."""
    while True:
        v = f.at(q, p, budget)
        if v.hi <= 0:
            raise PreconditionFailed("f takes a non-positive value", point=str(q), value=str(v))
        if v.lo > 0 and v.hi < 2 * v.lo:
            return v
        p += 1
        if p > budget.max_precision:
            raise BudgetExhausted(f"positivity of f({q}) not certified", budget.diagnostics())


def _below(x: ExactReal, bound: Fraction, budget: Budget) -> Fraction:
    """Upper bound of ``x`` strictly below ``bound``, refining precision."""
    p = 4
    while True:
        hi = x.approx(p).hi
        if hi < bound:
            return hi
        p += 2
        if p > budget.max_precision:
            raise BudgetExhausted("threshold refinement did not separate", budget.diagnostics())


def _above(x: ExactReal, bound: Fraction, budget: Budget) -> Fraction:
    p = 4
    while True:
        lo = x.approx(p).lo
        if lo > bound:
            return lo
        p += 2
        if p > budget.max_precision:
            raise BudgetExhausted("threshold refinement did not separate", budget.diagnostics())


class _InfBisection:
    def __init__(self, f: RealFn, oracle: InfOracle, budget: Budget):
        self.f = f
        self.oracle = oracle
        self.budget = budget
        self.intervals = [UNIT]
        self.steps: list[InfStep] = []
        self.stopped: Optional[tuple[Fraction, Fraction]] = None  # (m, lower)

    def extend_to(self, n: int) -> None:
        while len(self.intervals) <= n:
            self._step()

    def interval(self, n: int) -> RatInterval:
        self.extend_to(n)
        return self.intervals[n]

    def _step(self) -> None:
        n = len(self.intervals) - 1
        j = self.intervals[-1]
        if self.stopped is not None:
            self.intervals.append(j)
            return
        m = j.mid
        fm = _positive_value(self.f, m, n + 4, self.budget)
        left, right = RatInterval(j.lo, m), RatInterval(m, j.hi)
        inf_l = self.oracle.as_real(left, self.budget)
        inf_r = self.oracle.as_real(right, self.budget)
        if split(inf_l, fm.hi / 2, fm.lo) is Side.ABOVE:
            a = fm.hi / 2
            b = _above(inf_l, a, self.budget)
            if split(inf_r, a, b) is Side.ABOVE:
                # both halves have infimum above f(m)/2
                self.stopped = (m, fm.lo / 2)
                nxt, branch = RatInterval.point(m), "stop"
            else:
                nxt, branch = right, "right"
        else:
            b = fm.lo
            a = _below(inf_l, b, self.budget)
            if split(inf_r, a, b) is Side.BELOW:
                raise QuasiConvexityViolated(
                    "infima of both halves are below the midpoint value",
                    midpoint=str(m),
                )
            nxt, branch = left, "left"
        p = n + 4
        self.steps.append(InfStep(n, j, m, fm, inf_l.approx(p), inf_r.approx(p), branch))
        self.intervals.append(nxt)

    def limit(self) -> ExactReal:
        def approx(p: int) -> RatInterval:
            return self.interval(p)

        return ExactReal(approx)


def _point_below(f: RealFn, oracle: InfOracle, j: RatInterval, t: Fraction,
                 budget: Budget) -> tuple[Fraction, RatInterval]:
    """A rational in ``j`` where ``f`` is certified below ``t``, given that
    the infimum over ``j`` is below ``t``."""
    k = j
    for depth in range(budget.max_precision):
        m = k.mid
        p = max(4, depth + 4)
        while p <= budget.max_precision:
            v = f.at(m, p, budget)
            if v.hi < t or v.lo >= t:
                break
            p += 4
        if v.hi < t:
            return m, v
        for half in (RatInterval(k.lo, m), RatInterval(m, k.hi)):
            inf = oracle.as_real(half, budget)
            q = 4
            while q <= budget.max_precision and inf.approx(q).hi >= t \
                    and inf.approx(q).lo < t:
                q += 4
            if inf.approx(min(q, budget.max_precision)).hi < t:
                k = half
                break
        else:
            raise BudgetExhausted("no subinterval certified below the threshold",
                                  budget.diagnostics())
    raise BudgetExhausted("point search exceeded precision budget", budget.diagnostics())


def inf_dichotomy(
    f: Union[RealFn, RationalFn],
    inf_oracle: InfOracle,
    quasi_convex: bool = True,
    budget: Optional[Budget] = None,
    *,
    depth: Optional[int] = None,
) -> Outcome[InfResult]:
    """Decide whether the infimum of positive quasi-convex ``f`` on [0, 1] is
    positive, or produce points approaching a discontinuity with values
    tending to zero.

    Phase one bisects towards the infimum.  At each midpoint ``m`` it either
    certifies both halves above ``f(m)/2`` (positive infimum) or keeps the
    half holding the infimum.  Phase two flips ``alpha_n`` once the infimum
    passes the split at ``2**-(n+1)`` vs ``2**-n`` and records points
    ``y_n`` in the current interval with ``f(y_n) < 2**-n``.  The spliced
    limit ``y`` of these points is evaluated once; an infimum below
    ``f(y)/4`` rules out any later flip.
    """
    if not quasi_convex:
        raise PreconditionFailed("the infimum dichotomy needs a quasi-convex function")
    budget = Budget() if budget is None else budget
    depth = budget.max_precision // 2 if depth is None else depth
    f = as_real_fn(f)
    bis = _InfBisection(f, inf_oracle, budget)
    try:
        for n in range(1, depth + 1):
            bis.extend_to(n)
            if bis.stopped is not None:
                m, lower = bis.stopped
                return Decided(InfPositive(lower, real_from_rational(m), tuple(bis.steps)))
        z = bis.limit()
        inf_all = inf_oracle.as_real(UNIT, budget)
        points: dict[int, tuple[Fraction, RatInterval]] = {}

        def alpha_pred(n: int) -> bool:
            if split(inf_all, dyadic(n + 1), dyadic(n)) is Side.ABOVE:
                return True
            t = dyadic(n)
            points[n] = _point_below(f, inf_oracle, bis.interval(n), t, budget)
            return False

        alpha = BinarySeq.from_predicate(alpha_pred, label="infimum above threshold")
        m = alpha.first_one(depth)
        if m is not None:
            return Decided(InfPositive(dyadic(m + 2), z, tuple(bis.steps)))

        # y_{n-1} is frozen once alpha flips at n
        def y_term(n: int) -> ExactReal:
            if n == 1:
                return real_from_rational(bis.interval(0).mid)
            return real_from_rational(points[n - 1][0])

        approach = ConvergentSeq(
            lambda n: real_from_rational(points[n][0]) if alpha.term(n) == 0 else z,
            z,
            lambda p: p,
        )
        y = splice(alpha, ConvergentSeq(y_term, z, lambda p: p + 1)).limit_point
        fy: Optional[RatInterval]
        try:
            fy = f.evaluate(y, depth, budget)
        except BudgetExhausted:
            fy = None
        flip = alpha.first_one(len(alpha.evaluated()))
        if flip is not None:
            return Decided(InfPositive(dyadic(flip + 2), z, tuple(bis.steps)))
        values = tuple((n, points[n][0], points[n][1]) for n in sorted(points))
        if fy is None:
            return Decided(InfZeroEvidence(z, approach, values, None, tuple(bis.steps)))
        if fy.hi <= 0:
            raise PreconditionFailed("f takes a non-positive value at the limit point")
        if fy.lo <= 0:
            return Decided(InfZeroEvidence(z, approach, values, None, tuple(bis.steps)))
        if split(inf_all, fy.lo / 8, fy.lo / 4) is Side.ABOVE:
            return Decided(InfPositive(fy.lo / 8, y, tuple(bis.steps)))
        return Decided(InfZeroEvidence(z, approach, values, fy, tuple(bis.steps)))
    except BudgetExhausted as err:
        return Exhausted.from_error(err, stage="inf_dichotomy", steps=len(bis.steps))


# -- sampled quasi-convexity ----------------------------------------------------


@dataclass
class QuasiConvexReport:
    checked: int = 0
    violations: list[tuple[Fraction, Fraction, Fraction]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def quasiconvex_check(
    f: Union[RealFn, RationalFn],
    sample_triples: Sequence[tuple[RationalLike, RationalLike, RationalLike]],
    *,
    precision: int = 32,
    budget: Optional[Budget] = None,
) -> Outcome[QuasiConvexReport]:
    """Report triples where ``f(lam*x + (1-lam)*y)`` is certified above
    ``max(f(x), f(y))``."""
    f = as_real_fn(f)
    budget = Budget() if budget is None else budget
    report = QuasiConvexReport()
    try:
        for x, y, lam in sample_triples:
            x, y, lam = as_rational(x), as_rational(y), as_rational(lam)
            u = lam * x + (1 - lam) * y
            fu = f.at(u, precision, budget)
            top = f.at(x, precision, budget).max(f.at(y, precision, budget))
            report.checked += 1
            if fu.lo > top.hi:
                report.violations.append((x, y, lam))
    except BudgetExhausted as err:
        return Exhausted.from_error(err, stage="quasiconvex_check")
    return Decided(report)


# -- spikes -----------------------------------------------------------------------


class Spike(RationalFn):
    """``max(0, 1 - |x - z| / eps)``."""

    def __init__(self, z: RationalLike, eps: RationalLike):
        self.z, self.eps = as_rational(z), as_rational(eps)
        if self.eps <= 0:
            raise ValueError("spike width must be positive")
        self.label = f"spike({self.z}, {self.eps})"

    def value(self, q: Fraction) -> Fraction:
        return max(Fraction(0), 1 - abs(q - self.z) / self.eps)

    def enclose(self, iv: RatInterval, p: int) -> RatInterval:
        peak = self.value(min(max(self.z, iv.lo), iv.hi))
        low = min(self.value(iv.lo), self.value(iv.hi))
        return RatInterval(low, peak)


class Dips(RationalFn):
    """``1 - sum(depth_i * spike_i)`` for spikes with disjoint supports."""

    def __init__(self, dips: Sequence[tuple[RationalLike, RationalLike, RationalLike]]):
        self.dips = [(Spike(z, eps), as_rational(d)) for z, eps, d in dips]
        self.label = "1 - " + " - ".join(f"{d}*{s.label}" for s, d in self.dips) \
            if self.dips else "1"

    def value(self, q: Fraction) -> Fraction:
        return 1 - sum((d * s.value(q) for s, d in self.dips), Fraction(0))

    def enclose(self, iv: RatInterval, p: int) -> RatInterval:
        acc = RatInterval.point(1)
        for s, d in self.dips:
            acc = acc - s.enclose(iv, p).scale(d)
        return acc


def spike(z: RationalLike, eps: RationalLike) -> LiftedFn:
    """The spike of half-width ``eps`` around ``z`` as a real function."""
    return LiftedFn(Spike(z, eps))


def dips(spec: Sequence[tuple[RationalLike, RationalLike, RationalLike]]) -> LiftedFn:
    """``1 - sum depth * spike(z, eps)`` over ``(z, eps, depth)`` triples."""
    return LiftedFn(Dips(spec))


def single_dip_family(points: SeparatedSeqFixture, one_at: Optional[int]) -> LiftedFn:
    """``1 - (1 - 1/m) * spike(r_m, 2**-m)`` when ``one_at = m``; the constant
    1 when ``one_at`` is None."""
    if one_at is None:
        return LiftedFn(Dips([]))
    m = one_at
    if m < 1:
        raise ValueError("indices start at 1")
    return LiftedFn(Dips([(points.points(m), dyadic(m), 1 - Fraction(1, m))]))


def single_dip_oracle(points: SeparatedSeqFixture, one_at: Optional[int]) -> InfOracle:
    """Closed-form infimum of :func:`single_dip_family`."""
    fam = single_dip_family(points, one_at).base

    def inf(iv: RatInterval) -> Fraction:
        return fam.enclose(iv, 0).lo

    return closed_form_oracle(inf, "inf single dip")


def dips_oracle(spec: Sequence[tuple[RationalLike, RationalLike, RationalLike]]) -> InfOracle:
    """Closed-form infimum of :func:`dips` (exact for disjoint supports)."""
    fam = Dips(spec)
    return closed_form_oracle(lambda iv: fam.enclose(iv, 0).lo, "inf dips")


class RampAfter(RationalFn):
    """``1`` on ``[0, c]`` and ``x - c`` on ``(c, 1]``: positive and
    quasi-convex with infimum 0, not attained, and a jump at ``c``."""

    def __init__(self, c: RationalLike):
        self.c = as_rational(c)
        self.label = f"ramp_after({self.c})"

    def value(self, q: Fraction) -> Fraction:
        return Fraction(1) if q <= self.c else q - self.c

    def enclose(self, iv: RatInterval, p: int) -> RatInterval:
        if iv.hi <= self.c:
            return RatInterval.point(1)
        if iv.lo > self.c:
            return RatInterval(iv.lo - self.c, iv.hi - self.c)
        return RatInterval(Fraction(0), max(Fraction(1), iv.hi - self.c))


def ramp_after_oracle(c: RationalLike) -> InfOracle:
    c = as_rational(c)

    def inf(iv: RatInterval) -> Fraction:
        if iv.hi <= c:
            return Fraction(1)
        if iv.lo > c:
            return iv.lo - c
        return Fraction(0)

    return closed_form_oracle(inf, f"inf ramp_after({c})")
