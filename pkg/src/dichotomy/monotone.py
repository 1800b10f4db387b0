"""One-sided limits, eps-step partitions and discontinuity enumeration for
increasing functions and finite linear combinations of them.

All searches go through :func:`dichotomy.ivt.approx_root`; a stuck bisection
is what exhibits a jump.  Gap sizes at a stuck point are read off the two
endpoint sequences of the bisection at its deepest recorded step, which by
monotonicity bracket the left and right limits there.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .functions import (
    Budget,
    BudgetExhausted,
    Decided,
    Exhausted,
    MonotoneFn,
    Outcome,
    PreconditionFailed,
    RationalFn,
    SpanFn,
)
from .ivt import Root, Stuck, approx_root
from .reals import (
    ExactReal,
    RatInterval,
    RationalLike,
    Side,
    _precision_below,
    as_rational,
    dyadic,
    real_from_rational,
    split,
)

# -- helper function transforms ------------------------------------------


class _Shifted(RationalFn):
    """``t -> f(t) - level`` for a rational-point function."""

    def __init__(self, f: RationalFn, level: Union[Fraction, ExactReal]):
        self.f = f
        self.level = level if isinstance(level, ExactReal) else real_from_rational(level)
        self.domain = f.domain
        self.label = f"{f.label} - {level}"

    def value(self, q: Fraction) -> Optional[Fraction]:
        v = self.f.value(q)
        if v is None or self.level.exact is None:
            return None
        return v - self.level.exact

    def enclose(self, iv: RatInterval, p: int) -> RatInterval:
        return self.f.enclose(iv, p + 1) - self.level.approx(p + 1)


class _Reflected(RationalFn):
    """``s -> -f(1 - s)``; increasing whenever ``f`` is."""

    def __init__(self, f: RationalFn):
        self.f = f
        self.domain = f.domain
        self.label = f"-{f.label}(1-s)"

    def value(self, q: Fraction) -> Optional[Fraction]:
        v = self.f.value(1 - q)
        return None if v is None else -v

    def enclose(self, iv: RatInterval, p: int) -> RatInterval:
        return -self.f.enclose(RatInterval(1 - iv.hi, 1 - iv.lo), p)


class _RightWindow(RationalFn):
    """``s -> E(x + s*(2 - x)) - level`` on [0, 1], where ``E`` continues
    ``f`` past 1 with slope one so that it keeps increasing."""

    def __init__(self, f: RationalFn, x: Fraction, level: ExactReal):
        self.f = f
        self.x = x
        self.level = level
        self.f1 = f.eval_q(1)
        self.label = f"window({f.label}, {x})"

    def t_of(self, s: Fraction) -> Fraction:
        return self.x + s * (2 - self.x)

    def _ext(self, t: RatInterval, p: int) -> RatInterval:
        parts = []
        if t.lo <= 1:
            parts.append(self.f.enclose(RatInterval(t.lo, min(t.hi, Fraction(1))), p))
        if t.hi > 1:
            lo = max(t.lo, Fraction(1))
            parts.append(self.f1.approx(p) + RatInterval(lo - 1, t.hi - 1))
        out = parts[0]
        for extra in parts[1:]:
            out = out.hull(extra)
        return out

    def value(self, q: Fraction) -> Optional[Fraction]:
        t = self.t_of(q)
        base = self.f.value(min(t, Fraction(1)))
        if base is None or self.level.exact is None:
            return None
        return base + max(Fraction(0), t - 1) - self.level.exact

    def enclose(self, iv: RatInterval, p: int) -> RatInterval:
        t = RatInterval(self.t_of(iv.lo), self.t_of(iv.hi))
        return self._ext(t, p + 1) - self.level.approx(p + 1)


# -- one-sided limits ------------------------------------------------------


@dataclass(frozen=True)
class OneSidedLimit:
    """A one-sided limit value.

    ``kind`` is ``"witnessed"`` when every tested ``eps_n = 2**-n`` came with
    a point strictly on the requested side whose value is within ``eps_n``
    of ``value`` (then ``value`` is ``f(x)`` itself), and ``"sampled"`` when
    the bisection stuck at ``x`` (a jump at ``x`` from that side) and the
    value is read off samples approaching ``x`` that had stabilised.
    """

    value: ExactReal
    bracket: RatInterval
    kind: str
    witnesses: tuple[tuple[int, Fraction, RatInterval], ...] = field(default=(), repr=False)


def _increasing_base(f: Union[MonotoneFn, SpanFn, RationalFn]) -> tuple[RationalFn, int]:
    if isinstance(f, MonotoneFn):
        if f.direction == "increasing":
            return f, 1
        return f.increasing(), -1
    return f, 1


def one_sided_limit(
    f: MonotoneFn,
    x: RationalLike,
    side: str,
    p: int,
    budget: Optional[Budget] = None,
    *,
    window: int = 8,
    sampled: bool = True,
) -> Outcome[OneSidedLimit]:
    """Left or right limit of a monotone ``f`` at rational ``x`` to ``2**-p``.

    For every ``n <= p + 1`` a point ``w`` beyond ``x`` with
    ``f(x) < f(w) < f(x) + 2**-n`` is searched for with the approximate IVT
    applied to ``f - f(x) - 2**-(n+1)``.  If the search sticks at ``x``
    itself there is a jump at ``x``; the value is then taken from samples at
    ``x +- 2**-k`` provided they agree to ``2**-(p+1)`` over the last
    ``window`` values of ``k`` below the budget's precision limit, and
    :class:`Exhausted` (with the bracket in ``extra``) otherwise.  With
    ``sampled=False`` a jump at ``x`` always gives :class:`Exhausted`.
    """
    budget = Budget() if budget is None else budget
    x = as_rational(x)
    if side not in ("left", "right"):
        raise ValueError("side is 'left' or 'right'")
    g, sign = _increasing_base(f)
    if side == "right":
        if not 0 <= x < 1:
            raise ValueError("right limits need x in [0, 1)")
        h, xr, flip = g, x, 1
    else:
        if not 0 < x <= 1:
            raise ValueError("left limits need x in (0, 1]")
        h, xr, flip = _Reflected(g), 1 - x, -1
    try:
        res = _right_limit(h, xr, p, budget, window, sampled)
    except BudgetExhausted as err:
        return Exhausted.from_error(err, stage="one_sided_limit")
    s = sign * flip
    if isinstance(res, Exhausted):
        if s == -1 and "bracket" in res.extra:
            lo, hi = res.extra["bracket"]
            res.extra["bracket"] = [str(-Fraction(hi)), str(-Fraction(lo))]
        return res
    if s == 1:
        return Decided(res)
    return Decided(
        OneSidedLimit(-res.value, -res.bracket, res.kind, res.witnesses)
    )


def _right_limit(h: RationalFn, x: Fraction, p: int, budget: Budget, window: int,
                 sampled: bool = True):
    fx = h.eval_q(x)
    witnesses = []
    for n in range(1, p + 2):
        eps_n = dyadic(n)
        level = fx + eps_n / 2
        win = _RightWindow(h, x, level)
        res = approx_root(win, eps_n / 2, budget, depth=min(budget.max_precision, n + 32))
        if isinstance(res, Exhausted):
            return res
        r = res.value
        w: Optional[Fraction] = None
        if isinstance(r, Root):
            if r.point is not None:
                w = win.t_of(r.point)
            else:
                # the limit point itself is a root; any rational left of it
                # with the same certificate is not available, so take the
                # upper end of its enclosure
                w = win.t_of(r.z.approx(n + 8).hi)
        else:
            last = r.trace[-1]
            if last.a > 0:
                w = win.t_of(last.a)
        if w is None:
            return _sampled_limit(h, x, fx, p, budget, window if sampled else -1)
        wv = _ext_value(h, w, n + 4)
        witnesses.append((n, w, wv))
    bracket = fx.approx(p + 1)
    return OneSidedLimit(fx, bracket, "witnessed", tuple(witnesses))


def _ext_value(h: RationalFn, t: Fraction, p: int) -> RatInterval:
    if t <= 1:
        return h.eval_q(t).approx(p)
    return h.eval_q(1).approx(p) + RatInterval.point(t - 1)


def _sampled_limit(h: RationalFn, x: Fraction, fx: ExactReal, p: int,
                   budget: Budget, window: int):
    top = budget.max_precision
    ks = list(range(max(1, top - max(window, 0)), top + 1))
    vals = []
    for k in ks:
        budget.spend(k)
        vals.append(h.eval_q(x + dyadic(k)).approx(p + 2))
    lo = min(v.lo for v in vals)
    hi = max(v.hi for v in vals)
    last = h.eval_q(x + dyadic(top))
    bracket = RatInterval(fx.approx(p + 2).lo, vals[-1].hi)
    if window >= 0 and hi - lo <= dyadic(p + 1):
        return OneSidedLimit(last, RatInterval(lo, hi), "sampled")
    d = budget.diagnostics()
    return Exhausted(
        "right limit did not stabilise within the precision budget",
        d["queries"],
        d["deepest_precision"],
        d["last_candidate"],
        {"bracket": [str(bracket.lo), str(bracket.hi)]},
    )


def span_one_sided_limit(f: SpanFn, x: RationalLike, side: str, p: int,
                         budget: Optional[Budget] = None) -> Outcome[RatInterval]:
    """One-sided limit of a span function as an interval of width ``<= 2**-p``."""
    budget = Budget() if budget is None else budget
    extra = 2 + len(f.terms).bit_length()
    q = p + extra
    acc = RatInterval.point(0)
    for k, part in f.terms:
        kv = k.approx(q + 4)
        if kv.lo == kv.hi == 0:
            continue
        mag = max(abs(kv.lo), abs(kv.hi)) + 1
        bits = q + mag.numerator.bit_length() - mag.denominator.bit_length() + 1
        res = one_sided_limit(part, x, side, bits, budget)
        if isinstance(res, Exhausted):
            return res
        acc = acc + kv * res.value.value.approx(bits)
    return Decided(acc)


# -- eps-step partitions ---------------------------------------------------


@dataclass(frozen=True)
class PartitionPoint:
    x: ExactReal
    enclosure: RatInterval
    flag: str  # "NearLevel" | "StepCandidate"
    level: Optional[Fraction] = None
    gap: Optional[Fraction] = None
    left_value: Optional[RatInterval] = None
    right_value: Optional[RatInterval] = None


@dataclass(frozen=True)
class StepPartition:
    eps: Fraction
    points: tuple[PartitionPoint, ...]
    levels: tuple[Fraction, ...] = field(default=(), repr=False)

    def step_candidates(self) -> list[PartitionPoint]:
        return [pt for pt in self.points if pt.flag == "StepCandidate"]

    def open_intervals(self) -> list[tuple[Fraction, Fraction]]:
        """Rational intervals strictly between consecutive points."""
        out = []
        for a, b in zip(self.points, self.points[1:]):
            if a.enclosure.hi < b.enclosure.lo:
                out.append((a.enclosure.hi, b.enclosure.lo))
        return out


def _levels(f0: RatInterval, f1: RatInterval, eps: Fraction, slack: Fraction) -> list[Fraction]:
    lo, hi = f0.hi, f1.lo
    span = hi - lo
    if span <= 0:
        return []
    n = 0
    while span / (n + 1) + slack >= eps / 2:
        n += 1
    step = span / (n + 1)
    return [lo + i * step for i in range(1, n + 1)]


def _check_monotone(f: RationalFn, samples: int = 33) -> None:
    if isinstance(f, MonotoneFn):
        f.check_samples([Fraction(i, samples - 1) for i in range(samples)])


def eps_steps(
    f: Union[MonotoneFn, RationalFn],
    eps: RationalLike,
    budget: Optional[Budget] = None,
) -> Outcome[StepPartition]:
    """Points ``0 = x_1 < ... < x_n = 1`` off which an increasing ``f`` has no
    steps larger than ``eps``.

    One approximate-IVT search at tolerance ``eps/5`` per level, levels
    evenly spaced less than ``eps/2`` apart strictly between ``f(0)`` and
    ``f(1)``.  A stuck search flags its point as a step candidate.
    """
    eps = as_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    budget = Budget() if budget is None else budget
    g, _ = _increasing_base(f)
    _check_monotone(g)
    P = _precision_below(eps / 64)
    f0 = g.eval_q(0).approx(P)
    f1 = g.eval_q(1).approx(P)
    if f1.hi + dyadic(P) < f0.lo:
        raise PreconditionFailed("f(1) < f(0) for an increasing function")
    levels = _levels(f0, f1, eps, 2 * dyadic(P))
    depth = budget.max_precision
    pts = [
        PartitionPoint(real_from_rational(0), RatInterval.point(0), "NearLevel"),
        PartitionPoint(real_from_rational(1), RatInterval.point(1), "NearLevel"),
    ]
    try:
        for y in levels:
            res = approx_root(_Shifted(g, y), eps / 5, budget, depth=depth)
            if isinstance(res, Exhausted):
                return Exhausted(res.reason, res.queries, res.deepest_precision,
                                 res.last_candidate, {"level": str(y)})
            r = res.value
            if isinstance(r, Root):
                enc = RatInterval.point(r.point) if r.point is not None else r.z.approx(depth)
                pts.append(PartitionPoint(r.z, enc, "NearLevel", y))
            else:
                last = r.trace[-1]
                gap = (last.fb - last.fa).lo
                pts.append(
                    PartitionPoint(
                        r.evidence.z,
                        RatInterval(last.a, last.b),
                        "StepCandidate",
                        y,
                        gap,
                        last.fa + RatInterval.point(y),
                        last.fb + RatInterval.point(y),
                    )
                )
    except BudgetExhausted as err:
        return Exhausted.from_error(err, stage="eps_steps")
    return Decided(StepPartition(eps, tuple(_merge(pts)), tuple(levels)))


def _merge(pts: list[PartitionPoint]) -> list[PartitionPoint]:
    pts = sorted(pts, key=lambda pt: (pt.enclosure.lo, pt.enclosure.hi))
    out: list[PartitionPoint] = []
    for pt in pts:
        if out and out[-1].enclosure.intersects(pt.enclosure):
            prev = out[-1]
            keep, other = (pt, prev) if _rank(pt) > _rank(prev) else (prev, pt)
            enc = keep.enclosure
            if keep.flag == other.flag == "StepCandidate":
                # both bisections bracket the same jump
                enc = RatInterval(max(enc.lo, other.enclosure.lo),
                                  min(enc.hi, other.enclosure.hi))
            out[-1] = PartitionPoint(keep.x, enc, keep.flag, keep.level, keep.gap,
                                     keep.left_value, keep.right_value)
        else:
            out.append(pt)
    return out


def _rank(pt: PartitionPoint) -> tuple:
    # step candidates win; among them the larger observed gap
    return (pt.flag == "StepCandidate", pt.gap or 0, pt.enclosure.lo == pt.enclosure.hi)


# -- discontinuity enumeration --------------------------------------------


@dataclass(frozen=True)
class Point:
    xi: ExactReal
    enclosure: RatInterval
    gap_lower: Fraction
    level: int


@dataclass(frozen=True)
class Star:
    pass


STAR = Star()
Entry = Union[Point, Star]


def _gap_test(gap: RatInterval, k: int) -> bool:
    """Split the observed gap at ``2**-(k+1)`` vs ``2**-k``."""
    return _split_interval(gap, dyadic(k + 1), dyadic(k)) is Side.ABOVE


def _split_interval(iv: RatInterval, a: Fraction, b: Fraction) -> Side:
    # observed gaps are exact for piecewise-constant parts and narrow
    # otherwise; compare the midpoint with the threshold midpoint
    return Side.BELOW if iv.mid < (a + b) / 2 else Side.ABOVE


def _same_point(a: RatInterval, b: RatInterval) -> bool:
    return a.intersects(b)


def enumerate_discontinuities(
    f: Union[MonotoneFn, RationalFn],
    count: Optional[int],
    budget: Optional[Budget] = None,
    *,
    max_level: Optional[int] = None,
) -> Outcome[list[Entry]]:
    """First ``count`` entries (all entries up to ``max_level`` when ``count``
    is None) of a stream listing the jumps of increasing ``f``.

    Level ``k`` contributes one entry per point of the ``2**-k``-step
    partition: a :class:`Point` when the observed gap at a step candidate
    passes the ``2**-(k+1)`` / ``2**-k`` split and the point has not been
    listed at an earlier level, :class:`Star` otherwise.
    """
    budget = Budget() if budget is None else budget
    entries: list[Entry] = []
    seen: list[RatInterval] = []
    k = 0
    top = max_level if max_level is not None else budget.max_precision
    while count is None or len(entries) < count:
        k += 1
        if k > top:
            if count is None:
                return Decided(entries)
            d = budget.diagnostics()
            return Exhausted(f"no level beyond {top}", d["queries"], d["deepest_precision"],
                             d["last_candidate"], {"entries": len(entries)})
        res = eps_steps(f, dyadic(k), budget)
        if isinstance(res, Exhausted):
            return res
        for pt in res.value.points:
            entries.append(_classify(pt, k, seen))
            if len(entries) == count:
                break
    return Decided(entries)


def _classify(pt: PartitionPoint, k: int, seen: list[RatInterval]) -> Entry:
    if pt.flag != "StepCandidate":
        return STAR
    gap = pt.right_value - pt.left_value
    if gap.lo < 0:
        gap = RatInterval(Fraction(0), max(gap.hi, Fraction(0)))
    if not _gap_test(gap, k):
        return STAR
    if any(_same_point(pt.enclosure, s) for s in seen):
        return STAR
    seen.append(pt.enclosure)
    return Point(pt.x, pt.enclosure, dyadic(k + 1), k)


def span_discontinuities(
    f: SpanFn,
    count: Optional[int],
    budget: Optional[Budget] = None,
    *,
    max_level: Optional[int] = None,
) -> Outcome[list[Entry]]:
    """Jump stream for a linear combination of monotone functions.

    Parts whose coefficient is not certified apart from zero contribute
    nothing once the coefficient is known to be exactly zero; otherwise an
    undecided coefficient exhausts the call.  Candidate points of the
    remaining parts are interleaved and each is kept only if the gap of
    ``f`` itself, measured across the part's bracketing pair, passes a
    ``1/(2l)`` / ``1/l`` split for some dyadic ``l`` within budget.
    """
    budget = Budget() if budget is None else budget
    top = max_level if max_level is not None else budget.max_precision
    parts = []
    for k, part in f.terms:
        if k.exact is not None and k.exact == 0:
            continue
        try:
            if not _apart_from_zero(k, budget):
                d = budget.diagnostics()
                return Exhausted("coefficient not certified apart from zero",
                                 d["queries"], d["deepest_precision"], repr(k))
        except BudgetExhausted as err:
            return Exhausted.from_error(err, stage="coefficient")
        parts.append(part)

    if not parts:
        return Decided([STAR] * (count or 0))

    # candidate streams per part, level by level
    per_part: list[list[PartitionPoint]] = [[] for _ in parts]
    level = 0
    seen: list[RatInterval] = []
    entries: list[Entry] = []
    cursor = [0] * len(parts)
    while count is None or len(entries) < count:
        # ensure every part has a candidate queued, or refill by one level
        if all(cursor[i] >= len(per_part[i]) for i in range(len(parts))):
            level += 1
            if level > top:
                if count is None:
                    return Decided(entries)
                d = budget.diagnostics()
                return Exhausted(f"no level beyond {top}", d["queries"],
                                 d["deepest_precision"], d["last_candidate"],
                                 {"entries": len(entries)})
            for i, part in enumerate(parts):
                res = eps_steps(part, dyadic(level), budget)
                if isinstance(res, Exhausted):
                    return res
                per_part[i].extend(res.value.points)
        for i in range(len(parts)):
            if count is not None and len(entries) >= count:
                break
            if cursor[i] < len(per_part[i]):
                pt = per_part[i][cursor[i]]
                cursor[i] += 1
                entries.append(_refine(f, pt, seen, top))
            else:
                entries.append(STAR)
    return Decided(entries if count is None else entries[:count])


def _apart_from_zero(k: ExactReal, budget: Budget) -> bool:
    for n in range(1, budget.max_precision + 1):
        budget.spend(n)
        if split(abs(k), dyadic(n + 1), dyadic(n)) is Side.ABOVE:
            return True
    return False


def _refine(f: SpanFn, pt: PartitionPoint, seen: list[RatInterval], top: int) -> Entry:
    if pt.flag != "StepCandidate":
        return STAR
    a, b = pt.enclosure.lo, pt.enclosure.hi
    prec = top + 4
    gap = abs(f.enclose(RatInterval.point(b), prec) - f.enclose(RatInterval.point(a), prec))
    for j in range(1, top + 1):
        if _split_interval(gap, dyadic(j + 1), dyadic(j)) is Side.ABOVE:
            if any(_same_point(pt.enclosure, s) for s in seen):
                return STAR
            seen.append(pt.enclosure)
            return Point(pt.x, pt.enclosure, dyadic(j + 1), j)
    return STAR
