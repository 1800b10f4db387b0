"""Approximate roots without continuity.

Bisection keeps ``f(a_n) < -eps/2`` and ``f(b_n) > eps/2`` until some
midpoint is certified small.  If that never happens, the common limit ``z``
of the endpoints is evaluated once more; a value bounded away from zero
there means one endpoint sequence approaches ``z`` on the wrong side of it,
and that pair is returned as discontinuity evidence rather than a root.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Union

from .functions import (
    Budget,
    BudgetExhausted,
    Decided,
    Exhausted,
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
    Sign,
    Side,
    _precision_below,
    as_rational,
    dyadic,
    real_from_rational,
    sign_or_small,
    split,
)
from .streams import (
    AllZero,
    BinarySeq,
    ConvergentSeq,
    FirstOneAt,
    OmniscienceOracle,
    Unknown,
)


@dataclass(frozen=True)
class BisectionStep:
    """One recorded halving.  Values are for the oriented function
    ``orientation * f`` so that the left end is always the negative one."""

    n: int
    a: Fraction
    b: Fraction
    lam: int
    fa: RatInterval
    fb: RatInterval


@dataclass(frozen=True)
class DiscontinuityEvidence:
    """A point, a sequence converging to it, and certified value gaps.

    ``products`` holds ``(n, interval)`` pairs enclosing ``f(z) * f(x_n)``
    (for ``side`` ``FromLeft``/``FromRight``) or ``f(a_n) * f(b_n)`` for the
    two interleaved endpoint sequences when ``f(z)`` itself could not be
    evaluated (``Mixed``).
    """

    z: ExactReal
    approach: ConvergentSeq
    gap_certificate: Fraction
    side: str
    products: tuple[tuple[int, RatInterval], ...]
    value_at_z: Optional[RatInterval] = None

    @property
    def product_bound(self) -> Fraction:
        """Largest certified upper bound among the recorded products."""
        return max(iv.hi for _, iv in self.products)


@dataclass(frozen=True)
class Root:
    z: ExactReal
    value_bound: Fraction
    value: RatInterval
    point: Optional[Fraction] = None
    trace: tuple[BisectionStep, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class Stuck:
    evidence: DiscontinuityEvidence
    trace: tuple[BisectionStep, ...] = field(default=(), repr=False)


RootResult = Union[Root, Stuck]


class _Bisection:
    """Lazily extended halving of [a, b] for an oriented function.

    ``g(q)`` returns ``orientation * f(q)`` as an exact real.  Each midpoint
    is classified by ``sign_or_small(g(m), 2*eps)`` which separates
    ``|g| < eps`` from ``g > eps/2`` and ``g < -eps/2``.
    """

    def __init__(self, g: Callable[[Fraction], ExactReal], eps: Fraction,
                 fa: RatInterval, fb: RatInterval, budget: Optional[Budget] = None):
        self.g = g
        self.eps = eps
        self.budget = budget
        self.steps: list[BisectionStep] = [
            BisectionStep(0, Fraction(0), Fraction(1), 0, fa, fb)
        ]
        self.root: Optional[tuple[Fraction, RatInterval]] = None
        self._lock = threading.RLock()
        self._p = _precision_below(2 * eps / 8)

    def classify(self, q: Fraction) -> tuple[Sign, RatInterval]:
        if self.budget is not None:
            self.budget.note(q)
        v = self.g(q)
        s = sign_or_small(v, 2 * self.eps)
        return s, v.approx(self._p)

    def extend_to(self, n: int) -> None:
        with self._lock:
            while len(self.steps) <= n:
                last = self.steps[-1]
                k = last.n + 1
                if last.lam == 1:
                    self.steps.append(BisectionStep(k, last.a, last.b, 1, last.fa, last.fb))
                    continue
                m = (last.a + last.b) / 2
                s, iv = self.classify(m)
                if s is Sign.SMALL:
                    self.root = (m, iv)
                    self.steps.append(BisectionStep(k, m, m, 1, iv, iv))
                elif s is Sign.NEGATIVE:
                    self.steps.append(BisectionStep(k, m, last.b, 0, iv, last.fb))
                else:
                    self.steps.append(BisectionStep(k, last.a, m, 0, last.fa, iv))

    def step(self, n: int) -> BisectionStep:
        self.extend_to(n)
        return self.steps[n]

    def limit(self) -> ExactReal:
        def approx(p: int) -> RatInterval:
            s = self.step(p)
            return RatInterval(s.a, s.b)

        return ExactReal(approx)

    def endpoint_seq(self, which: str, z: ExactReal) -> ConvergentSeq:
        def term(n: int) -> ExactReal:
            s = self.step(n)
            return real_from_rational(s.a if which == "a" else s.b)

        return ConvergentSeq(term, z, lambda p: p)


def _oriented(f: RealFn, orientation: int, budget: Budget, p_hint: int):
    def g(q: Fraction) -> ExactReal:
        x = real_from_rational(q)
        val = ExactReal(lambda p: f.evaluate(x, p, budget))
        return val if orientation > 0 else -val

    return g


def _endpoint_signs(g0: ExactReal, g1: ExactReal, eps: Fraction):
    return sign_or_small(g0, 2 * eps), sign_or_small(g1, 2 * eps)


def approx_root(
    f: Union[RealFn, RationalFn],
    eps: RationalLike,
    budget: Optional[Budget] = None,
    depth: Optional[int] = None,
) -> Outcome[RootResult]:
    """Find ``z`` with ``|f(z)| < eps`` or discontinuity evidence at ``z``.

    ``depth`` halvings are performed (default: the budget's precision
    limit), then ``f`` is evaluated at the limit with whatever budget is
    left.  Raises :class:`PreconditionFailed` when both endpoint values are
    certified to have the same sign.
    """
    eps = as_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    budget = Budget() if budget is None else budget
    depth = budget.max_precision if depth is None else depth
    f = as_real_fn(f)
    lo, hi = f.domain
    if (lo, hi) != (0, 1):
        raise PreconditionFailed("approx_root works on [0, 1]", domain=(str(lo), str(hi)))
    p_eval = _precision_below(2 * eps / 8)
    try:
        plain = _oriented(f, 1, budget, p_eval)
        v0, v1 = plain(Fraction(0)), plain(Fraction(1))
        s0, s1 = _endpoint_signs(v0, v1, eps)
        for s, q, v in ((s0, Fraction(0), v0), (s1, Fraction(1), v1)):
            if s is Sign.SMALL:
                iv = v.approx(p_eval)
                return Decided(Root(real_from_rational(q), eps, iv, q))
        if s0 == s1:
            raise PreconditionFailed(
                "f(0) and f(1) certified to have the same sign", sign=s0.value
            )
        orientation = 1 if s0 is Sign.NEGATIVE else -1
        g = _oriented(f, orientation, budget, p_eval)
        fa = g(Fraction(0)).approx(p_eval)
        fb = g(Fraction(1)).approx(p_eval)
        bis = _Bisection(g, eps, fa, fb, budget)
        bis.extend_to(depth)
    except BudgetExhausted as err:
        return Exhausted.from_error(err, stage="bisection")

    trace = tuple(bis.steps[: depth + 1])
    if bis.root is not None:
        m, iv = bis.root
        return Decided(Root(real_from_rational(m), eps, iv * RatInterval.point(orientation), m, trace))

    z = bis.limit()
    gz = ExactReal(lambda p: _scaled(f.evaluate(z, p, budget), orientation))
    try:
        s = sign_or_small(gz, eps)
        gz_iv = gz.approx(_precision_below(eps / 8))
    except BudgetExhausted:
        # f cannot be pinned down at z: both endpoint sequences converge to
        # z with values on opposite sides of +-eps/2
        return Decided(Stuck(_mixed_evidence(bis, z, depth), trace))
    if bis.root is not None:
        # the lazy extension found a small midpoint while approximating z
        m, iv = bis.root
        return Decided(Root(real_from_rational(m), eps, iv * RatInterval.point(orientation), m, trace))
    if s is Sign.SMALL:
        return Decided(Root(z, eps / 2, gz_iv.scale(Fraction(orientation)), None, trace))
    which = "a" if s is Sign.POSITIVE else "b"
    return Decided(Stuck(_one_sided_evidence(bis, z, gz_iv, which, depth), trace))


def _scaled(iv: RatInterval, orientation: int) -> RatInterval:
    return iv if orientation > 0 else -iv


def _one_sided_evidence(bis: _Bisection, z: ExactReal, gz: RatInterval,
                        which: str, depth: int) -> DiscontinuityEvidence:
    products = []
    gap = None
    for s in bis.steps[1 : depth + 1]:
        fx = s.fa if which == "a" else s.fb
        products.append((s.n, gz * fx))
        g = (gz - fx).lo if which == "a" else (fx - gz).lo
        gap = g if gap is None else min(gap, g)
    return DiscontinuityEvidence(
        z=z,
        approach=bis.endpoint_seq(which, z),
        gap_certificate=gap if gap is not None else Fraction(0),
        side="FromLeft" if which == "a" else "FromRight",
        products=tuple(products),
        value_at_z=gz,
    )


def _mixed_evidence(bis: _Bisection, z: ExactReal, depth: int) -> DiscontinuityEvidence:
    products = []
    gap = None
    for s in bis.steps[1 : depth + 1]:
        products.append((s.n, s.fa * s.fb))
        g = (s.fb - s.fa).lo
        gap = g if gap is None else min(gap, g)

    def term(n: int) -> ExactReal:
        s = bis.step((n + 1) // 2)
        return real_from_rational(s.a if n % 2 else s.b)

    approach = ConvergentSeq(term, z, lambda p: 2 * p + 1)
    return DiscontinuityEvidence(
        z=z,
        approach=approach,
        gap_certificate=gap if gap is not None else Fraction(0),
        side="Mixed",
        products=tuple(products),
        value_at_z=None,
    )


# -- rational-query variant ----------------------------------------------


@dataclass(frozen=True)
class RootAtRational:
    q: Fraction
    value: RatInterval


@dataclass(frozen=True)
class Candidate:
    z: ExactReal
    a: Fraction
    b: Fraction
    fa: RatInterval
    fb: RatInterval
    trace: tuple[BisectionStep, ...] = field(default=(), repr=False)


def approx_root_rational(
    f: RationalFn, eps: RationalLike, depth: int
) -> Union[RootAtRational, Candidate]:
    """Bisection that only ever evaluates ``f`` at rational points.

    After ``depth`` halvings without a small midpoint, the limit of the
    halving is returned together with the last pair of sign certificates.
    """
    eps = as_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    p = _precision_below(2 * eps / 8)
    v0, v1 = f.eval_q(0), f.eval_q(1)
    s0, s1 = _endpoint_signs(v0, v1, eps)
    if s0 is Sign.SMALL:
        return RootAtRational(Fraction(0), v0.approx(p))
    if s1 is Sign.SMALL:
        return RootAtRational(Fraction(1), v1.approx(p))
    if s0 == s1:
        raise PreconditionFailed("f(0) and f(1) certified to have the same sign", sign=s0.value)
    orientation = 1 if s0 is Sign.NEGATIVE else -1

    def g(q: Fraction) -> ExactReal:
        v = f.eval_q(q)
        return v if orientation > 0 else -v

    bis = _Bisection(g, eps, g(Fraction(0)).approx(p), g(Fraction(1)).approx(p))
    bis.extend_to(depth)
    if bis.root is not None:
        m, iv = bis.root
        return RootAtRational(m, _scaled(iv, orientation))
    last = bis.steps[depth]
    return Candidate(bis.limit(), last.a, last.b, last.fa, last.fb, tuple(bis.steps))


# -- root or universal lower bound -----------------------------------


@dataclass(frozen=True)
class RootBelowEps:
    z: ExactReal
    value: RatInterval
    point: Optional[Fraction] = None


@dataclass(frozen=True)
class AllRationalsAtLeast:
    """Every enumerated rational has ``|f(q)| > certified_lower``
    (the universal branch, granted by an omniscience oracle)."""

    eps: Fraction
    certified_lower: Fraction
    oracle_answer: object = None


def unit_rationals(n: int) -> Fraction:
    """The ``n``-th rational of [0, 1] (from 1): 0, 1, 1/2, 1/3, 2/3, 1/4, ...

    Enumerated by denominator, then numerator, lowest terms only.
    """
    if n < 1:
        raise IndexError("enumeration starts at 1")
    if n <= 2:
        return Fraction(n - 1)
    k = 2
    d = 2
    while True:
        for num in range(1, d):
            if _gcd(num, d) == 1:
                k += 1
                if k == n:
                    return Fraction(num, d)
        d += 1


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def root_or_all_large(
    f: Union[RealFn, RationalFn],
    eps: RationalLike,
    oracle: OmniscienceOracle,
    enumeration: Callable[[int], Fraction] = unit_rationals,
    budget: Optional[Budget] = None,
    *,
    strongly_extensional: bool = True,
    require_sign_change: bool = True,
) -> Outcome[Union[RootBelowEps, AllRationalsAtLeast]]:
    """Either a point with ``|f| < eps`` or, via the oracle, ``|f(q)| > eps/2``
    on every rational of the enumeration.

    The approximate-root search runs first.  If it gets stuck (or the
    endpoint test is waived with ``require_sign_change=False``), the
    universal branch is decided by asking ``oracle`` about the sequence
    ``lam_n = 1`` iff some ``q_k`` (``k <= n``) tested ``|f(q_k)| < eps``.
    """
    eps = as_rational(eps)
    budget = Budget() if budget is None else budget
    rf = as_real_fn(f)
    try:
        res = approx_root(rf, eps, budget)
    except PreconditionFailed:
        if require_sign_change:
            raise
        res = None
    if isinstance(res, Exhausted):
        return res
    if isinstance(res, Decided) and isinstance(res.value, Root):
        r = res.value
        return Decided(RootBelowEps(r.z, r.value, r.point))
    if not strongly_extensional:
        raise PreconditionFailed("the universal branch needs a strongly extensional f")

    small_at: dict[int, RatInterval] = {}

    def is_small(n: int) -> bool:
        q = enumeration(n)
        v = ExactReal(lambda p: rf.at(q, p, budget))
        if split(abs(v), eps / 2, eps) is Side.BELOW:
            small_at[n] = v.approx(_precision_below(eps / 4))
            return True
        return False

    lam = BinarySeq.from_predicate(is_small, label="small value found")
    try:
        answer = oracle.decide(lam)
    except BudgetExhausted as err:
        return Exhausted.from_error(err, stage="oracle")
    if isinstance(answer, FirstOneAt):
        lam.term(answer.n)
        q = enumeration(answer.n)
        return Decided(RootBelowEps(real_from_rational(q), small_at[answer.n], q))
    if isinstance(answer, AllZero):
        return Decided(AllRationalsAtLeast(eps, eps / 2, answer))
    assert isinstance(answer, Unknown)
    d = budget.diagnostics()
    return Exhausted(
        f"oracle undecided after {answer.budget} terms",
        d["queries"],
        d["deepest_precision"],
        d["last_candidate"],
        {"stage": "oracle"},
    )
