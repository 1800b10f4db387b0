"""Decision procedures for a strongly extensional function along a
convergent sequence: either some distance ``|f(x_n) - f(x)|`` is large or
all of them are small.

``f`` is trusted to be strongly extensional (``f(y) != f(z)`` implies
``y != z``); a sampled violation surfaces as :class:`PreconditionFailed`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Union

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
    Side,
    as_rational,
    dyadic,
    lower_bound_bits,
    split,
)
from .streams import (
    AllZero,
    BinarySeq,
    ConvergentSeq,
    FirstOneAt,
    OmniscienceOracle,
    Unknown,
    splice,
)


@dataclass(frozen=True)
class WitnessAbove:
    """``|f(x_n) - f(x)| > certified_gap``, with ``certified_gap > alpha``."""

    n: int
    certified_gap: Fraction
    distance: Optional[RatInterval] = None


@dataclass(frozen=True)
class AllBelow:
    """``|f(x_n) - f(x)| < beta`` for every ``n``."""

    beta: Fraction


TrickOneResult = Union[WitnessAbove, AllBelow]


class _Failed(Exception):
    def __init__(self, outcome: Exhausted):
        self.outcome = outcome


def _value(f: RealFn, x: ExactReal, budget: Budget) -> ExactReal:
    return ExactReal(lambda p: f.evaluate(x, p, budget))


def _distance(f: RealFn, y: ExactReal, fx: ExactReal, budget: Budget) -> ExactReal:
    return abs(_value(f, y, budget) - fx)


def trick_one(
    f: Union[RealFn, RationalFn],
    xs: ConvergentSeq,
    alpha: RationalLike,
    beta: RationalLike,
    budget: Optional[Budget] = None,
) -> Outcome[TrickOneResult]:
    """Either some ``|f(x_n) - f(x)| > alpha`` or all are ``< beta``.

    A binary sequence flips at the first ``n`` whose distance passes the
    split at the inner thirds ``gamma < gamma'`` of ``(alpha, beta)``.  The
    splice of that sequence with ``xs`` has a computable limit ``z``; the
    distance ``|f(z) - f(x)|`` decides the branch.  If it is positive, ``z``
    is apart from ``x`` and the modulus of ``xs`` bounds how far the flip
    index can be.
    """
    alpha, beta = as_rational(alpha), as_rational(beta)
    if not alpha < beta:
        raise ValueError("alpha must be below beta")
    if alpha < 0:
        # every distance is >= 0 > alpha
        return Decided(WitnessAbove(1, Fraction(0)))
    budget = Budget() if budget is None else budget
    f = as_real_fn(f)
    gamma = alpha + (beta - alpha) / 3
    gamma2 = alpha + 2 * (beta - alpha) / 3
    try:
        return Decided(_trick_one(f, xs, gamma, gamma2, beta, budget))
    except BudgetExhausted as err:
        return Exhausted.from_error(err, stage="trick_one")
    except _Failed as fail:
        return fail.outcome


def _trick_one(f: RealFn, xs: ConvergentSeq, gamma: Fraction, gamma2: Fraction,
               beta: Fraction, budget: Budget) -> TrickOneResult:
    x = xs.limit_point
    fx = _value(f, x, budget)
    dists: dict[int, ExactReal] = {}

    def dist(n: int) -> ExactReal:
        if n not in dists:
            dists[n] = _distance(f, xs.term(n), fx, budget)
        return dists[n]

    lam = BinarySeq.from_predicate(
        lambda n: split(dist(n), gamma, gamma2) is Side.ABOVE, label="distance flag"
    )
    z = splice(lam, xs).limit_point
    big_d = _distance(f, z, fx, budget)
    if split(big_d, 0, gamma) is Side.BELOW:
        return AllBelow(beta)
    # f(z) != f(x), so z is apart from x
    k = lower_bound_bits(abs(z - x), budget.max_precision)
    if k is None:
        d = budget.diagnostics()
        raise _Failed(Exhausted("separation of z from x not found within precision budget",
                                d["queries"], d["deepest_precision"], d["last_candidate"]))
    big_n = xs.modulus(k + 1)
    m = lam.first_one(big_n)
    if m is None:
        raise PreconditionFailed(
            "f(z) differs from f(x) although z cannot be separated from the tail",
            modulus_index=big_n,
        )
    return WitnessAbove(m, gamma, dist(m).approx(budget.max_precision // 2))


# -- the second trick -------------------------------------------------------


@dataclass(frozen=True)
class EventuallyBelow:
    """``|f(x_n) - f(x)| < beta`` for all ``n >= N``."""

    N: int


@dataclass
class IndexStream:
    """Lazy, strictly increasing indices whose distance is certified ``>= beta``."""

    f: RealFn
    xs: ConvergentSeq
    beta: Fraction
    budget: Budget
    precision: int = 48
    _found: list[tuple[int, RatInterval]] = field(default_factory=list, repr=False)
    _next: int = field(default=1, repr=False)

    def __iter__(self) -> Iterator[int]:
        i = 0
        while True:
            while i >= len(self._found):
                self._advance()
            yield self._found[i][0]
            i += 1

    def take(self, count: int) -> list[int]:
        while len(self._found) < count:
            self._advance()
        return [n for n, _ in self._found[:count]]

    def certificate(self, index: int) -> RatInterval:
        for n, iv in self._found:
            if n == index:
                return iv
        raise KeyError(index)

    def _advance(self) -> None:
        fx = _value(self.f, self.xs.limit_point, self.budget)
        while True:
            n = self._next
            self._next += 1
            self.budget.spend(self.precision)
            d = _distance(self.f, self.xs.term(n), fx, self.budget).approx(self.precision)
            if d.lo >= self.beta:
                self._found.append((n, d))
                return


@dataclass(frozen=True)
class InfinitelyOften:
    evidence: IndexStream


TrickTwoResult = Union[EventuallyBelow, InfinitelyOften]


def tail_schedule(tails: int) -> list[int]:
    """Tail start indices ``1, 2, 4, ...``."""
    return [1 << i for i in range(tails)]


def trick_two(
    f: Union[RealFn, RationalFn],
    xs: ConvergentSeq,
    beta: RationalLike,
    oracle: OmniscienceOracle,
    budget: Optional[Budget] = None,
    *,
    tails: int = 6,
) -> Outcome[TrickTwoResult]:
    """Either the distances are eventually ``< beta`` or infinitely often ``>= beta``.

    The first trick (with ``alpha = beta/2``) is run on tails starting at
    ``1, 2, 4, ...``; an all-below answer on a tail settles the first
    branch, and a tail the budget cannot resolve ends the schedule.
    Otherwise the oracle is asked about the binary sequence whose ``k``-th
    term records whether some tail starting at or before ``k`` is all
    below ``beta``: a first one at ``k`` gives ``EventuallyBelow(k)``,
    all zeros give the infinitely-often branch, and an unknown answer
    exhausts.
    """
    beta = as_rational(beta)
    if beta <= 0:
        raise ValueError("beta must be positive")
    budget = Budget() if budget is None else budget
    f = as_real_fn(f)
    alpha = beta / 2

    def tail_below(start: int) -> bool:
        res = trick_one(f, xs.tail(start), alpha, beta, budget)
        if isinstance(res, Exhausted):
            raise _Failed(res)
        return isinstance(res.value, AllBelow)

    try:
        for start in tail_schedule(tails):
            try:
                if tail_below(start):
                    return Decided(EventuallyBelow(start))
            except _Failed:
                # deeper tails are beyond the precision budget
                break
        mu = BinarySeq.from_predicate(tail_below, label="tail all below")
        answer = oracle.decide(mu)
    except _Failed as fail:
        return fail.outcome
    except BudgetExhausted as err:
        return Exhausted.from_error(err, stage="trick_two")
    if isinstance(answer, FirstOneAt):
        return Decided(EventuallyBelow(answer.n))
    if isinstance(answer, AllZero):
        precision = min(48, budget.max_precision // 2)
        return Decided(InfinitelyOften(IndexStream(f, xs, beta, budget, precision)))
    d = budget.diagnostics()
    return Exhausted(
        "oracle could not decide whether some tail stays below beta",
        d["queries"],
        d["deepest_precision"],
        d["last_candidate"],
        {"oracle_budget": answer.budget if isinstance(answer, Unknown) else None},
    )
