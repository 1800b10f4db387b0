"""Three dichotomies driven by a trusted decision procedure or oracle:
decomposing the line at two points, positivity of the distance to a located
set, and the finite-approximation / separated-sequence split for a set given
by dense points.  Also a sampled validator for neat coverings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Union

from .functions import Budget, BudgetExhausted, Decided, Exhausted, Outcome, PreconditionFailed
from .reals import (
    MAX_PRECISION,
    ExactReal,
    RatInterval,
    RationalLike,
    Side,
    as_rational,
    dyadic,
    lower_bound_bits,
    real_from_rational,
    split,
)
from .streams import BinarySeq, flip_index


def _real(x: Union[ExactReal, RationalLike]) -> ExactReal:
    return x if isinstance(x, ExactReal) else real_from_rational(x)


# -- decomposing the line ---------------------------------------------------


class LowerSet:
    """The queried point is ``<= b``."""

    def __repr__(self) -> str:
        return "LowerSet"


class UpperSet:
    """The queried point is ``> a``."""

    def __repr__(self) -> str:
        return "UpperSet"


LOWER, UPPER = LowerSet(), UpperSet()


@dataclass
class CoveringDecision:
    """A total decision for ``R = (-inf, b] u (a, inf)``; soundness is trusted."""

    decide_fn: Callable[[ExactReal], Union[LowerSet, UpperSet]]
    calls: int = 0

    def decide(self, x: ExactReal) -> Union[LowerSet, UpperSet]:
        self.calls += 1
        return self.decide_fn(x)


def sound_covering(a: RationalLike, b: RationalLike) -> CoveringDecision:
    """Covering decision for rational ``a <= b``.

    For ``a < b`` it splits the queried point between ``a`` and ``b``; for
    ``a == b`` it needs the point's exact value.
    """
    a, b = as_rational(a), as_rational(b)
    if a > b:
        raise ValueError("a covering needs a <= b")

    def decide(x: ExactReal):
        if a < b:
            return LOWER if split(x, a, b) is Side.BELOW else UPPER
        if x.exact is None:
            raise PreconditionFailed("equality covering needs exact query points")
        return LOWER if x.exact <= b else UPPER

    return CoveringDecision(decide)


@dataclass(frozen=True)
class ALessB:
    """``b - a > gap > 0``."""

    gap: Fraction


@dataclass(frozen=True)
class AEqualsB:
    """The decision put ``b + (b - a)`` in the lower set; with ``a <= b`` this
    forces ``a = b``, an answer only an omniscient decision can give in
    general."""

    lpo_strength: bool = True


def decompose_line(
    d: CoveringDecision,
    a: Union[ExactReal, RationalLike],
    b: Union[ExactReal, RationalLike],
    *,
    max_precision: int = MAX_PRECISION,
) -> Union[ALessB, AEqualsB]:
    """Decide ``a < b`` or ``a = b`` with one query at ``z = b + (b - a)``."""
    a, b = _real(a), _real(b)
    z = b + (b - a)
    if isinstance(d.decide(z), LowerSet):
        return AEqualsB()
    # z > a gives 2b > 2a
    k = lower_bound_bits(b - a, max_precision)
    if k is None:
        raise PreconditionFailed("upper-set answer but b - a not certified positive")
    return ALessB(dyadic(k))


# -- distance to a located set ---------------------------------------------


@dataclass(frozen=True)
class LocatedSet:
    """A set with computable distance and near points.

    ``dist(x, p)`` is within ``2**-p`` of the distance from ``x`` to the set;
    ``near_point(x, p)`` is a member whose distance to ``x`` exceeds the set
    distance by at most ``2**-p``.
    """

    dist: Callable[[ExactReal, int], Fraction]
    near_point: Callable[[ExactReal, int], ExactReal]
    label: str = "Q"


def singleton_set(c: RationalLike) -> LocatedSet:
    c = as_rational(c)
    pt = real_from_rational(c)
    return LocatedSet(lambda x, p: abs(x - pt).approx(p + 1).mid, lambda x, p: pt, f"{{{c}}}")


def interval_set(lo: RationalLike, hi: RationalLike) -> LocatedSet:
    lo, hi = as_rational(lo), as_rational(hi)

    def clamp(x: ExactReal, p: int) -> Fraction:
        m = x.approx(p + 1).mid
        return min(max(m, lo), hi)

    def dist(x: ExactReal, p: int) -> Fraction:
        m = x.approx(p + 1).mid
        return max(Fraction(0), lo - m, m - hi)

    return LocatedSet(dist, lambda x, p: real_from_rational(clamp(x, p)), f"[{lo}, {hi}]")


def null_sequence_set() -> LocatedSet:
    """``{2**-n : n >= 1}``: zero is at distance 0 but not a member."""

    def nearest(x: ExactReal, p: int) -> tuple[Fraction, Fraction]:
        # points beyond index p + 3 lie within 2**-(p+3) of 0
        m = x.approx(p + 3).mid
        best, gap = dyadic(p + 3), abs(m - dyadic(p + 3))
        for n in range(1, p + 3):
            d = abs(dyadic(n) - m)
            if d < gap:
                best, gap = dyadic(n), d
        return best, gap

    return LocatedSet(
        lambda x, p: nearest(x, p)[1],
        lambda x, p: real_from_rational(nearest(x, p)[0]),
        "{2^-n}",
    )


@dataclass(frozen=True)
class ApartFromX:
    gap: Fraction


class NotInQ:
    def __repr__(self) -> str:
        return "NotInQ"


NOT_IN_Q = NotInQ()


@dataclass
class SeparationOracle:
    """Says of each point that it is apart from ``x`` or not in the set;
    soundness is trusted."""

    classify_fn: Callable[[ExactReal], Union[ApartFromX, NotInQ]]
    calls: int = 0

    def classify(self, z: ExactReal) -> Union[ApartFromX, NotInQ]:
        self.calls += 1
        return self.classify_fn(z)


def threshold_separation(x: Union[ExactReal, RationalLike], gap: RationalLike) -> SeparationOracle:
    """Apart from ``x`` when ``|z - x|`` passes the split at ``gap`` vs
    ``2*gap``, not in the set otherwise; with ``gap == 0`` always not in
    the set."""
    x, gap = _real(x), as_rational(gap)

    def classify(z: ExactReal):
        if gap > 0 and split(abs(z - x), gap, 2 * gap) is Side.ABOVE:
            return ApartFromX(gap)
        return NOT_IN_Q

    return SeparationOracle(classify)


@dataclass(frozen=True)
class DistPositive:
    lower: Fraction


@dataclass(frozen=True)
class DistZero:
    tested_levels: int


def located_distance(
    q: LocatedSet,
    x: Union[ExactReal, RationalLike],
    sep: SeparationOracle,
    budget: Optional[Budget] = None,
    *,
    check: int = 16,
) -> Outcome[Union[DistPositive, DistZero]]:
    """Decide whether the distance from ``x`` to ``q`` is positive or zero.

    ``lambda_n`` flips once the distance passes the split at ``2**-(n+1)``
    vs ``2**-n``.  The points ``y_n`` follow near points ``q_n`` of ``q``
    until the flip and freeze afterwards; their limit ``y`` is classified
    once.  Not-in-set means no flip ever happens (distance zero); apart from
    ``x`` bounds the flip index, and the flip gives the lower bound.  On
    the zero branch the first ``check`` terms of ``lambda`` are scanned;
    a flip there means the separation oracle was unsound.
    """
    budget = Budget() if budget is None else budget
    x = _real(x)

    d = ExactReal(lambda p: RatInterval.around(q.dist(x, p + 1), dyadic(p + 1)))
    lam = BinarySeq.from_predicate(
        lambda n: (budget.spend(n + 2) or True)
        and split(d, dyadic(n + 1), dyadic(n)) is Side.ABOVE,
        label="distance positive",
    )
    near: dict[int, ExactReal] = {}

    def q_n(n: int) -> ExactReal:
        if n not in near:
            near[n] = q.near_point(x, n + 2)
        return near[n]

    # while lambda_n = 0 the near point q_n is within 2**-(n-2) of x, so the
    # spliced limit is pinned by lambda up to index p + 3
    def approx(p: int) -> RatInterval:
        n = p + 3
        m = flip_index(lam, n)
        if m is not None:
            return q_n(m).approx(p)
        return x.approx(p + 1).widen(dyadic(p + 1))

    try:
        y = ExactReal(approx)
        verdict = sep.classify(y)
        if isinstance(verdict, NotInQ):
            m = lam.first_one(check)
            if m is not None:
                raise PreconditionFailed("separation says not in the set but the distance "
                                         "is positive", flip=m)
            return Decided(DistZero(check))
        # |y - x| > gap forces a flip by the first N with 2**-(N-2) < gap
        big_n = 3
        while dyadic(big_n - 2) >= verdict.gap:
            big_n += 1
        m = flip_index(lam, big_n)
        if m is None:
            raise PreconditionFailed("separation says apart but no flip before the bound",
                                     bound=big_n)
        return Decided(DistPositive(dyadic(m + 1)))
    except BudgetExhausted as err:
        return Exhausted.from_error(err, stage="located_distance")


# -- finite approximation or separated sequence ----------------------------


@dataclass(frozen=True)
class FiniteApprox:
    """Every scanned point is within ``eps`` of one of ``points``."""

    points: tuple[ExactReal, ...]
    scanned: int


@dataclass(frozen=True)
class SeparatedSeq:
    """Points pairwise more than ``eps/2`` apart (certified)."""

    prefix: tuple[ExactReal, ...]
    indices: tuple[int, ...] = ()


def neat_dichotomy(
    points: Callable[[int], Union[ExactReal, RationalLike]],
    eps: RationalLike,
    budget: Optional[Budget] = None,
    *,
    scan: int = 256,
    max_points: int = 64,
) -> Outcome[Union[FiniteApprox, SeparatedSeq]]:
    """Greedy packing over the dense points ``points(1), points(2), ...``.

    A scanned point joins the packing unless the split of its distance to a
    member at ``eps/2`` vs ``eps`` puts it below ``eps``.  Reaching
    ``max_points`` members gives a separated sequence; finishing the scan
    gives a finite approximation valid for the scanned points.
    """
    eps = as_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    budget = Budget() if budget is None else budget
    members: list[ExactReal] = []
    indices: list[int] = []
    try:
        for i in range(1, scan + 1):
            budget.spend(0)
            x = _real(points(i))
            covered = False
            for c in members:
                budget.spend(0)
                if split(abs(x - c), eps / 2, eps) is Side.BELOW:
                    covered = True
                    break
            if not covered:
                members.append(x)
                indices.append(i)
                if len(members) >= max_points:
                    return Decided(SeparatedSeq(tuple(members), tuple(indices)))
    except BudgetExhausted as err:
        return Exhausted.from_error(err, stage="neat_dichotomy")
    return Decided(FiniteApprox(tuple(members), scan))


def dyadic_enumeration(i: int) -> Fraction:
    """``0, 1, 1/2, 1/4, 3/4, 1/8, 3/8, ...``: dense in [0, 1]."""
    if i == 1:
        return Fraction(0)
    if i == 2:
        return Fraction(1)
    k = (i - 2).bit_length()
    first = 1 << (k - 1)
    j = i - 2 - first
    return Fraction(2 * j + 1, 1 << k)


# -- neat coverings ---------------------------------------------------------


Membership = Callable[[Fraction], bool]


@dataclass(frozen=True)
class NeatCovering:
    s: Membership
    t: Membership
    s_buffer: Membership
    t_buffer: Membership
    eps: Fraction


@dataclass
class NeatCoveringReport:
    gap_violations: list[tuple[Fraction, Fraction]] = field(default_factory=list)
    cover_violations: list[tuple[Fraction, str]] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.gap_violations and not self.cover_violations


def validate_neat_covering(c: NeatCovering, samples: list[RationalLike]) -> NeatCoveringReport:
    """Check the gap and cover conditions on the sample points.

    Every sampled pair ``s`` in the S-buffer and ``t`` in the T-buffer must
    be more than ``eps`` apart, and every sample must lie in T or its
    buffer and in S or its buffer.
    """
    report = NeatCoveringReport()
    pts = [as_rational(q) for q in samples]
    s_buf = [q for q in pts if c.s_buffer(q)]
    t_buf = [q for q in pts if c.t_buffer(q)]
    for s in s_buf:
        for t in t_buf:
            if not abs(s - t) > c.eps:
                report.gap_violations.append((s, t))
    for q in pts:
        if not (c.t(q) or c.t_buffer(q)):
            report.cover_violations.append((q, "T"))
        if not (c.s(q) or c.s_buffer(q)):
            report.cover_violations.append((q, "S"))
    return report
