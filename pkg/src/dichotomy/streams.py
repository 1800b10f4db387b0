"""Lazy sequences: increasing binary sequences, modulus-carrying real
sequences, the splice of a sequence with its limit, and omniscience oracles."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Protocol, Union

from .reals import ExactReal, RatInterval, as_rational, dyadic, real_from_rational


class MonotonicityError(ValueError):
    """A binary sequence produced 1 followed by 0."""


class BinarySeq:
    """Increasing 0/1 sequence indexed from 1, evaluated lazily.

    Every query evaluates (and caches) the whole prefix up to the index so
    that a violation of monotonicity is caught on any queried prefix.
    """

    def __init__(self, fn: Callable[[int], int], label: str = ""):
        self._fn = fn
        self._prefix: list[int] = []
        self._lock = threading.RLock()
        self.label = label

    def term(self, n: int) -> int:
        if n < 1:
            raise IndexError("binary sequences are indexed from 1")
        with self._lock:
            while len(self._prefix) < n:
                k = len(self._prefix) + 1
                v = self._fn(k)
                if v not in (0, 1):
                    raise ValueError(f"term {k} is {v!r}, not 0/1")
                if self._prefix and self._prefix[-1] == 1 and v == 0:
                    raise MonotonicityError(f"{self.label or 'sequence'} drops to 0 at {k}")
                self._prefix.append(v)
            return self._prefix[n - 1]

    __call__ = term

    def evaluated(self) -> list[int]:
        with self._lock:
            return list(self._prefix)

    def first_one(self, limit: int) -> Optional[int]:
        """Least ``m <= limit`` with ``term(m) == 1``, else None."""
        for n in range(1, limit + 1):
            if self.term(n) == 1:
                return n
        return None

    @classmethod
    def zeros(cls) -> BinarySeq:
        return cls(lambda n: 0, label="zeros")

    @classmethod
    def flip_at(cls, m: int) -> BinarySeq:
        if m < 1:
            raise ValueError("flip index starts at 1")
        return cls(lambda n: int(n >= m), label=f"flip@{m}")

    @classmethod
    def from_predicate(cls, pred: Callable[[int], bool], label: str = "") -> BinarySeq:
        """``term(n) = 1`` iff ``pred(k)`` for some ``k <= n``.

        ``pred`` is evaluated at most once per index and never beyond the
        first index where it holds.
        """
        state = {"hit": False}

        def fn(n: int) -> int:
            if state["hit"]:
                return 1
            if pred(n):
                state["hit"] = True
                return 1
            return 0

        return cls(fn, label=label)


class ConvergentSeq:
    """Real sequence with its limit and a Cauchy modulus.

    For all ``p`` and ``n >= modulus(p)``: ``|term(n) - limit_point| <= 2**-p``.
    """

    def __init__(
        self,
        term: Callable[[int], ExactReal],
        limit_point: ExactReal,
        modulus: Callable[[int], int],
    ):
        self._term = term
        self._terms: dict[int, ExactReal] = {}
        self._lock = threading.RLock()
        self.limit_point = limit_point
        self._modulus = modulus

    def term(self, n: int) -> ExactReal:
        if n < 1:
            raise IndexError("sequences are indexed from 1")
        with self._lock:
            t = self._terms.get(n)
            if t is None:
                t = self._term(n)
                self._terms[n] = t
            return t

    def modulus(self, p: int) -> int:
        return max(1, self._modulus(max(p, 0)))

    def tail(self, start: int) -> ConvergentSeq:
        """The sequence ``n -> term(start + n - 1)``."""
        return ConvergentSeq(
            lambda n: self.term(start + n - 1),
            self.limit_point,
            lambda p: max(1, self.modulus(p) - start + 1),
        )

    def modulus_holds(self, p: int, indices, check_precision: Optional[int] = None) -> bool:
        """Check the modulus at ``p`` for the given indices at finite precision."""
        q = p + 4 if check_precision is None else check_precision
        bound = dyadic(p)
        lim = self.limit_point.approx(q)
        for n in indices:
            if n < self.modulus(p):
                continue
            d = abs(self.term(n).approx(q) - lim)
            if d.lo > bound:
                return False
        return True

    @classmethod
    def constant(cls, value) -> ConvergentSeq:
        x = value if isinstance(value, ExactReal) else real_from_rational(value)
        return cls(lambda n: x, x, lambda p: 1)

    @classmethod
    def geometric(cls, centre=0, scale=1, sign: int = 1) -> ConvergentSeq:
        """``centre + sign * scale * 2**-n`` with its exact modulus."""
        centre, scale = as_rational(centre), as_rational(scale)
        extra = max(0, (abs(scale).numerator // abs(scale).denominator).bit_length()) if scale else 0
        return cls(
            lambda n: real_from_rational(centre + sign * scale * dyadic(n)),
            real_from_rational(centre),
            lambda p: p + extra,
        )


def flip_index(lam: BinarySeq, n: int) -> Optional[int]:
    """Least ``m`` with ``lam(m) = 1`` provided ``lam(n) = 1``, else None."""
    if lam.term(n) == 0:
        return None
    return lam.first_one(n)


def splice(lam: BinarySeq, xs: ConvergentSeq) -> ConvergentSeq:
    """The sequence equal to ``xs.limit_point`` while ``lam`` is 0 and frozen
    at ``xs.term(m)`` once ``lam`` flips at ``m``.

    The result carries ``xs``'s modulus.  Its limit is ``xs.term(m)`` if
    ``lam`` ever flips at ``m`` and ``xs.limit_point`` otherwise; that limit
    is computable because at precision ``p`` only ``lam`` up to
    ``xs.modulus(p + 2)`` needs inspecting.
    """

    def term(n: int) -> ExactReal:
        m = flip_index(lam, n)
        return xs.limit_point if m is None else xs.term(m)

    def approx(p: int) -> RatInterval:
        n = xs.modulus(p + 2)
        m = flip_index(lam, n)
        if m is not None:
            return xs.term(m).approx(p)
        # either lam never flips, or it flips after n where terms are
        # 2**-(p+2)-close to the limit point
        return xs.limit_point.approx(p + 2).widen(dyadic(p + 2))

    return ConvergentSeq(term, ExactReal(approx), xs.modulus)


# -- omniscience oracles --------------------------------------------------


@dataclass(frozen=True)
class AllZero:
    pass


@dataclass(frozen=True)
class FirstOneAt:
    n: int


@dataclass(frozen=True)
class Unknown:
    budget: int


OracleAnswer = Union[AllZero, FirstOneAt, Unknown]


class OracleMismatch(AssertionError):
    """A fixture oracle was paired with a sequence contradicting it."""


class OmniscienceOracle(Protocol):
    def decide(self, seq: BinarySeq) -> OracleAnswer: ...


@dataclass(frozen=True)
class BoundedSearchOracle:
    """Scan ``term(1..n)``; never claims ``AllZero``."""

    n: int

    def decide(self, seq: BinarySeq) -> OracleAnswer:
        m = seq.first_one(self.n)
        return Unknown(self.n) if m is None else FirstOneAt(m)


def bounded_search_oracle(n: int) -> BoundedSearchOracle:
    if n < 1:
        raise ValueError("search bound must be at least 1")
    return BoundedSearchOracle(n)


@dataclass(frozen=True)
class FixtureOracle:
    """Return a known ground truth after validating it on a prefix.

    This is the test-side stand-in for LPO.  ``check`` terms of the paired
    sequence are scanned; any disagreement raises :class:`OracleMismatch`.
    """

    truth: Union[AllZero, FirstOneAt]
    check: int = 32

    def decide(self, seq: BinarySeq) -> OracleAnswer:
        validate_prefix(self.truth, seq, self.check)
        return self.truth


def fixture_oracle(truth: Union[AllZero, FirstOneAt], check: int = 32) -> FixtureOracle:
    if not isinstance(truth, (AllZero, FirstOneAt)):
        raise TypeError("fixture ground truth must be AllZero or FirstOneAt")
    return FixtureOracle(truth, check)


def validate_prefix(truth: Union[AllZero, FirstOneAt], seq: BinarySeq, check: int) -> None:
    if isinstance(truth, FirstOneAt):
        horizon = max(check, truth.n)
    else:
        horizon = check
    m = seq.first_one(horizon)
    if isinstance(truth, AllZero):
        if m is not None:
            raise OracleMismatch(f"AllZero oracle but term({m}) = 1")
    elif m != truth.n:
        raise OracleMismatch(f"oracle says first one at {truth.n}, prefix says {m}")


# -- separated sequence fixture -------------------------------------------


@dataclass(frozen=True)
class SeparatedSeqFixture:
    """Rational points in [0, 1] with explicit separation witnesses.

    ``separation(x)`` returns ``n`` such that ``|points(i) - x| > 2**-n`` for
    every ``i >= n``.  A desk-checkable surrogate for a Specker sequence: the
    witness function is only partial (it raises ``ValueError`` where no
    witness exists, e.g. at an accumulation point).
    """

    points: Callable[[int], Fraction]
    separation: Callable[[Fraction], int]

    def check(self, x: Fraction, horizon: int = 256) -> bool:
        n = self.separation(as_rational(x))
        bound = dyadic(n)
        return all(abs(self.points(i) - x) > bound for i in range(n, n + horizon))


def geometric_fixture() -> SeparatedSeqFixture:
    """Points ``1 - 2**-n``; witnesses exist for every rational in [0, 1)."""

    def points(n: int) -> Fraction:
        return 1 - dyadic(n)

    def separation(x: Fraction) -> int:
        if x >= 1:
            raise ValueError("no separation witness at the accumulation point 1")
        # need 1 - 2**-n - x > 2**-n, i.e. 2**-(n-1) < 1 - x
        n = 1
        while dyadic(n - 1) >= 1 - x:
            n += 1
        return n

    return SeparatedSeqFixture(points, separation)
