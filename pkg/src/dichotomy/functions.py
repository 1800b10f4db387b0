"""Function representations queried by the algorithms.

Two kinds of function are distinguished:

* :class:`RationalFn` is total on rationals and exposes an interval
  extension ``enclose`` (an enclosure of the image of a rational interval).
* :class:`RealFn` is evaluated at exact reals and may fail: evaluating at a
  point whose approximations keep straddling a jump never produces a narrow
  enough interval, so the evaluation runs out of budget.  That failure is
  reported as :class:`Exhausted` and is how discontinuities surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Generic, Iterable, Optional, Sequence, TypeVar, Union

from .reals import (
    ExactReal,
    RatInterval,
    RationalLike,
    _compact,
    as_rational,
    dyadic,
    real_from_rational,
)

T = TypeVar("T")


class PreconditionFailed(Exception):
    """An input violated a checkable precondition of an algorithm."""

    def __init__(self, reason: str, **details: Any):
        super().__init__(reason)
        self.reason = reason
        self.details = details


class BudgetExhausted(Exception):
    """Raised internally when a :class:`Budget` runs out."""

    def __init__(self, reason: str, diagnostics: dict):
        super().__init__(reason)
        self.reason = reason
        self.diagnostics = diagnostics


@dataclass
class Budget:
    """Query and precision allowance for one algorithm invocation.

    A budget is consumed as it is used; create a fresh one per call.
    """

    max_queries: int = 100_000
    max_precision: int = 64
    queries: int = 0
    deepest: int = 0
    last_candidate: Any = None

    def spend(self, precision: int = 0, n: int = 1) -> None:
        if precision > self.max_precision:
            raise BudgetExhausted(
                f"precision {precision} beyond limit {self.max_precision}", self.diagnostics()
            )
        self.queries += n
        self.deepest = max(self.deepest, precision)
        if self.queries > self.max_queries:
            raise BudgetExhausted(f"more than {self.max_queries} queries", self.diagnostics())

    @property
    def remaining(self) -> int:
        return max(0, self.max_queries - self.queries)

    def note(self, candidate: Any) -> None:
        self.last_candidate = candidate

    def diagnostics(self) -> dict:
        return {
            "queries": self.queries,
            "deepest_precision": self.deepest,
            "last_candidate": None if self.last_candidate is None else str(self.last_candidate),
        }


@dataclass(frozen=True)
class Decided(Generic[T]):
    value: T

    @property
    def decided(self) -> bool:
        return True


@dataclass(frozen=True)
class Exhausted:
    reason: str
    queries: int = 0
    deepest_precision: int = 0
    last_candidate: Optional[str] = None
    extra: dict = field(default_factory=dict)

    @property
    def decided(self) -> bool:
        return False

    @classmethod
    def from_error(cls, err: BudgetExhausted, **extra: Any) -> Exhausted:
        d = err.diagnostics
        return cls(err.reason, d["queries"], d["deepest_precision"], d["last_candidate"], extra)


Outcome = Union[Decided[T], Exhausted]


# -- rational-point functions ---------------------------------------------


class RationalFn:
    """Function total on rationals of its domain, with an interval extension.

    Subclasses implement :meth:`enclose`.  On a degenerate interval the
    enclosure has width at most ``2**-p``; on wider intervals it is merely
    sound.
    """

    domain: tuple[Fraction, Fraction] = (Fraction(0), Fraction(1))
    label: str = "f"

    def enclose(self, iv: RatInterval, p: int) -> RatInterval:
        raise NotImplementedError

    def value(self, q: Fraction) -> Optional[Fraction]:
        """The exact rational value at ``q`` if the function has one."""
        return None

    def eval_q(self, q: RationalLike) -> ExactReal:
        q = as_rational(q)
        v = self.value(q)
        if v is not None:
            return real_from_rational(v)
        pt = RatInterval.point(q)
        return ExactReal(lambda p: self.enclose(pt, p))

    def __call__(self, q: RationalLike) -> ExactReal:
        return self.eval_q(q)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.label}>"


class PointwiseFn(RationalFn):
    """Rational-valued function from an exact evaluator and an enclosure."""

    def __init__(
        self,
        value: Callable[[Fraction], Fraction],
        enclosure: Callable[[RatInterval], RatInterval],
        *,
        label: str = "f",
        domain: tuple[RationalLike, RationalLike] = (0, 1),
        lipschitz: Optional[Fraction] = None,
    ):
        self._value = value
        self._enclosure = enclosure
        self.label = label
        self.domain = (as_rational(domain[0]), as_rational(domain[1]))
        self.lipschitz = lipschitz

    def value(self, q: Fraction) -> Fraction:
        return self._value(q)

    def enclose(self, iv: RatInterval, p: int) -> RatInterval:
        if iv.lo == iv.hi:
            return RatInterval.point(self._value(iv.lo))
        return self._enclosure(iv)


class StepFn(RationalFn):
    """``lo_val`` left of ``c`` and ``hi_val`` from ``c`` on (``q >= c``)."""

    def __init__(self, c: RationalLike, lo_val: RationalLike, hi_val: RationalLike):
        self.c = as_rational(c)
        self.lo_val = as_rational(lo_val)
        self.hi_val = as_rational(hi_val)
        self.label = f"step({self.c}; {self.lo_val}, {self.hi_val})"

    def value(self, q: Fraction) -> Fraction:
        return self.hi_val if q >= self.c else self.lo_val

    def enclose(self, iv: RatInterval, p: int) -> RatInterval:
        if iv.hi < self.c:
            return RatInterval.point(self.lo_val)
        if iv.lo >= self.c:
            return RatInterval.point(self.hi_val)
        return RatInterval.point(self.lo_val).hull(RatInterval.point(self.hi_val))


def step_fn(c: RationalLike, lo_val: RationalLike, hi_val: RationalLike) -> StepFn:
    return StepFn(c, lo_val, hi_val)


class Staircase(RationalFn):
    """``base + slope*q + sum(size_i for c_i <= q)``.

    Increasing whenever ``slope`` and every ``size_i`` are non-negative.
    """

    def __init__(
        self,
        jumps: Iterable[tuple[RationalLike, RationalLike]],
        base: RationalLike = 0,
        slope: RationalLike = 0,
    ):
        self.jumps = sorted((as_rational(c), as_rational(s)) for c, s in jumps)
        cs = [c for c, _ in self.jumps]
        if len(set(cs)) != len(cs):
            raise ValueError("staircase breakpoints must be distinct")
        self.base = as_rational(base)
        self.slope = as_rational(slope)
        self.label = "stair(" + ", ".join(f"{c}: {s}" for c, s in self.jumps) + ")"

    def value(self, q: Fraction) -> Fraction:
        return self.base + self.slope * q + sum((s for c, s in self.jumps if q >= c), Fraction(0))

    def enclose(self, iv: RatInterval, p: int) -> RatInterval:
        acc = RatInterval.point(self.base) + iv.scale(self.slope)
        for c, s in self.jumps:
            if iv.lo >= c:
                acc = acc + RatInterval.point(s)
            elif iv.hi >= c:
                acc = acc + RatInterval.point(0).hull(RatInterval.point(s))
        return acc

    def jump_points(self) -> list[Fraction]:
        return [c for c, s in self.jumps if s != 0]


# -- monotone wrappers and the span class ----------------------------------


class MonotoneFn(RationalFn):
    """A rational function declared monotone in ``direction``.

    The enclosure over an interval uses only endpoint values, which is
    exactly what monotonicity buys.
    """

    def __init__(self, base: RationalFn, direction: str = "increasing"):
        if direction not in ("increasing", "decreasing"):
            raise ValueError("direction is 'increasing' or 'decreasing'")
        self.base = base
        self.direction = direction
        self.domain = base.domain
        self.label = f"{direction}({base.label})"

    def value(self, q: Fraction) -> Optional[Fraction]:
        return self.base.value(q)

    def eval_q(self, q: RationalLike) -> ExactReal:
        return self.base.eval_q(q)

    def enclose(self, iv: RatInterval, p: int) -> RatInterval:
        a = self.base.enclose(RatInterval.point(iv.lo), p)
        b = self.base.enclose(RatInterval.point(iv.hi), p)
        return a.hull(b)

    def increasing(self) -> MonotoneFn:
        """An increasing view: ``self`` or its negation."""
        if self.direction == "increasing":
            return self
        return MonotoneFn(Scaled(Fraction(-1), self.base), "increasing")

    def check_samples(self, qs: Sequence[Fraction], p: int = 32) -> None:
        """Raise :class:`PreconditionFailed` on a sampled violation."""
        qs = sorted(set(as_rational(q) for q in qs))
        vals = [self.base.enclose(RatInterval.point(q), p) for q in qs]
        slack = dyadic(p)
        for (q, a), (r, b) in zip(zip(qs, vals), zip(qs[1:], vals[1:])):
            up = b.hi + slack < a.lo
            down = a.hi + slack < b.lo
            if (self.direction == "increasing" and up) or (
                self.direction == "decreasing" and down
            ):
                raise PreconditionFailed(
                    "monotonicity violated", left=str(q), right=str(r)
                )


class Scaled(RationalFn):
    def __init__(self, k: RationalLike, base: RationalFn):
        self.k = as_rational(k)
        self.base = base
        self.domain = base.domain
        self.label = f"{self.k}*{base.label}"

    def value(self, q: Fraction) -> Optional[Fraction]:
        v = self.base.value(q)
        return None if v is None else self.k * v

    def enclose(self, iv: RatInterval, p: int) -> RatInterval:
        bits = max(0, math.ceil(math.log2(abs(self.k) + 1)))
        return self.base.enclose(iv, p + bits).scale(self.k)


def _coef_real(k: Union[ExactReal, RationalLike]) -> ExactReal:
    return k if isinstance(k, ExactReal) else real_from_rational(k)


class SpanFn(RationalFn):
    """Finite linear combination ``sum(k_i * part_i)`` of monotone parts."""

    def __init__(self, terms: Iterable[tuple[Union[ExactReal, RationalLike], MonotoneFn]]):
        self.terms = [(_coef_real(k), part) for k, part in terms]
        if not self.terms:
            raise ValueError("empty span")
        self.domain = self.terms[0][1].domain
        self.label = " + ".join(f"{k!r}*{part.label}" for k, part in self.terms)

    def value(self, q: Fraction) -> Optional[Fraction]:
        total = Fraction(0)
        for k, part in self.terms:
            v = part.value(q)
            if k.exact is None or v is None:
                return None
            total += k.exact * v
        return total

    def enclose(self, iv: RatInterval, p: int) -> RatInterval:
        q = p + 2 + len(self.terms).bit_length()
        while True:
            acc = RatInterval.point(0)
            for k, part in self.terms:
                kv = k.approx(q)
                acc = acc + kv * part.enclose(iv, q)
            if iv.lo != iv.hi or acc.width <= dyadic(p):
                return acc
            q *= 2


# -- exact-real evaluation ------------------------------------------------


class RealFn:
    """Function on exact reals.  ``eval`` returns ``Decided(interval)`` with
    width at most ``2**-p`` or ``Exhausted``."""

    domain: tuple[Fraction, Fraction] = (Fraction(0), Fraction(1))
    label: str = "f"

    def evaluate(self, x: ExactReal, p: int, budget: Budget) -> RatInterval:
        """Like :meth:`eval` but raises :class:`BudgetExhausted`."""
        raise NotImplementedError

    def eval(self, x: ExactReal, p: int, budget: Budget) -> Outcome[RatInterval]:
        try:
            return Decided(self.evaluate(x, p, budget))
        except BudgetExhausted as err:
            return Exhausted.from_error(err)

    def at(self, q: RationalLike, p: int, budget: Budget) -> RatInterval:
        return self.evaluate(real_from_rational(q), p, budget)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.label}>"


class LiftedFn(RealFn):
    """A :class:`RationalFn` evaluated at exact reals by refinement.

    Approximations of ``x`` are requested at increasing precision until the
    enclosure of ``f`` over them is narrow enough.  At a jump the enclosure
    never narrows and the budget runs out.
    """

    def __init__(self, base: RationalFn, modulus_free: bool = True):
        self.base = base
        self.domain = base.domain
        self.label = base.label
        self.modulus_free = modulus_free
        lip = getattr(base, "lipschitz", None)
        if not modulus_free and lip is None:
            raise ValueError("modulus_free=False needs a base with a Lipschitz constant")
        self._extra = 1 if modulus_free else 2 + max(0, math.ceil(math.log2(lip + 1)))

    def evaluate(self, x: ExactReal, p: int, budget: Budget) -> RatInterval:
        target = dyadic(p)
        if x.exact is not None:
            budget.spend(p)
            return self.base.enclose(RatInterval.point(x.exact), p)
        q = p + self._extra
        while True:
            budget.spend(q)
            iv = self.base.enclose(x.approx(q), p + 1)
            if iv.width <= target:
                return _compact(iv, p) if iv.width <= dyadic(p + 1) else iv
            if not self.modulus_free:
                # a Lipschitz bound that fails to deliver means a wrong constant
                raise PreconditionFailed("declared Lipschitz constant too small", label=self.label)
            budget.note(x.approx(q))
            q += 1


def lift(f: RationalFn, modulus_free: bool = True) -> LiftedFn:
    return LiftedFn(f, modulus_free)


class ComputedFn(RealFn):
    """Total function given directly as an operation on exact reals."""

    def __init__(self, fn: Callable[[ExactReal], ExactReal], label: str = "f", domain=(0, 1)):
        self._fn = fn
        self.label = label
        self.domain = (as_rational(domain[0]), as_rational(domain[1]))

    def evaluate(self, x: ExactReal, p: int, budget: Budget) -> RatInterval:
        budget.spend(p)
        return self._fn(x).approx(p)


def as_real_fn(f: Union[RealFn, RationalFn]) -> RealFn:
    return f if isinstance(f, RealFn) else lift(f)
