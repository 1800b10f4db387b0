"""Exact real arithmetic on precision-indexed rational intervals.

A real number is represented by a function ``p -> RatInterval`` whose result
contains the real and has width at most ``2**-p``.  Every comparison the
algorithms need is phrased as a two-threshold test (``split``) or a three-way
approximate sign test (``sign_or_small``), both of which always terminate.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]

#: Hard ceiling for internal precision escalation.
MAX_PRECISION = 4096


class PrecisionLimitError(ArithmeticError):
    """Working precision had to exceed the configured hard limit."""


def as_rational(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def dyadic(p: int) -> Fraction:
    """Return ``2**-p`` exactly."""
    return Fraction(1, 1 << p) if p >= 0 else Fraction(1 << -p)


@dataclass(frozen=True, slots=True)
class RatInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, q: RationalLike) -> RatInterval:
        q = as_rational(q)
        return cls(q, q)

    @classmethod
    def around(cls, q: Fraction, radius: Fraction) -> RatInterval:
        return cls(q - radius, q + radius)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, q: RationalLike) -> bool:
        q = as_rational(q)
        return self.lo <= q <= self.hi

    def intersects(self, other: RatInterval) -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def hull(self, other: RatInterval) -> RatInterval:
        return RatInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def widen(self, radius: Fraction) -> RatInterval:
        return RatInterval(self.lo - radius, self.hi + radius)

    def __add__(self, other: RatInterval) -> RatInterval:
        return RatInterval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: RatInterval) -> RatInterval:
        return RatInterval(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> RatInterval:
        return RatInterval(-self.hi, -self.lo)

    def __mul__(self, other: RatInterval) -> RatInterval:
        products = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return RatInterval(min(products), max(products))

    def scale(self, k: Fraction) -> RatInterval:
        if k >= 0:
            return RatInterval(self.lo * k, self.hi * k)
        return RatInterval(self.hi * k, self.lo * k)

    def __abs__(self) -> RatInterval:
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RatInterval(Fraction(0), max(-self.lo, self.hi))

    def min(self, other: RatInterval) -> RatInterval:
        return RatInterval(min(self.lo, other.lo), min(self.hi, other.hi))

    def max(self, other: RatInterval) -> RatInterval:
        return RatInterval(max(self.lo, other.lo), max(self.hi, other.hi))

    def round_out(self, bits: int) -> RatInterval:
        """Widen outward to the dyadic grid of spacing ``2**-bits``."""
        scale = 1 << bits
        lo = Fraction(math.floor(self.lo * scale), scale)
        hi = Fraction(math.ceil(self.hi * scale), scale)
        return RatInterval(lo, hi)

    def __str__(self) -> str:
        if self.lo == self.hi:
            return f"[{self.lo}]"
        return f"[{self.lo}, {self.hi}]"


def _compact(iv: RatInterval, p: int) -> RatInterval:
    # Keeps denominators bounded along long arithmetic chains.  Only applied
    # when the caller has left 2**-(p+1) of slack in the width budget.
    bits = p + 2
    if iv.lo.denominator <= (1 << bits) and iv.hi.denominator <= (1 << bits):
        return iv
    return iv.round_out(bits)


class ExactReal:
    """An exact real given by rational interval approximations.

    ``approx(p)`` returns an interval of width at most ``2**-p`` containing the
    real.  Results are memoized per precision under a lock, so repeated
    queries are identical and instances can be shared between threads.
    """

    __slots__ = ("_fn", "_cache", "_lock", "exact", "label")

    def __init__(
        self,
        fn: Callable[[int], RatInterval],
        *,
        exact: Optional[Fraction] = None,
        label: Optional[str] = None,
    ):
        self._fn = fn
        self._cache: dict[int, RatInterval] = {}
        self._lock = threading.RLock()
        self.exact = exact
        self.label = label

    @classmethod
    def from_rational(cls, q: RationalLike) -> ExactReal:
        q = as_rational(q)
        point = RatInterval(q, q)
        return cls(lambda p: point, exact=q, label=str(q))

    def approx(self, p: int) -> RatInterval:
        if p < 0:
            p = 0
        with self._lock:
            cached = self._cache.get(p)
            if cached is None:
                cached = self._fn(p)
                if cached.width > dyadic(p):
                    raise AssertionError(
                        f"approximation at precision {p} too wide: {cached.width}"
                    )
                self._cache[p] = cached
            return cached

    def __repr__(self) -> str:
        if self.label is not None:
            return f"ExactReal({self.label})"
        return f"ExactReal(~{self.approx(16)})"

    # arithmetic sugar -------------------------------------------------
    def __add__(self, other):
        return arith("add", self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return arith("sub", self, _coerce(other))

    def __rsub__(self, other):
        return arith("sub", _coerce(other), self)

    def __mul__(self, other):
        return arith("mul", self, _coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return arith("neg", self)

    def __abs__(self):
        return arith("abs", self)


def _coerce(value: Union[ExactReal, RationalLike]) -> ExactReal:
    if isinstance(value, ExactReal):
        return value
    return ExactReal.from_rational(value)


def real_from_rational(q: RationalLike) -> ExactReal:
    return ExactReal.from_rational(q)


def _magnitude_bits(x: ExactReal) -> int:
    iv = x.approx(0)
    bound = max(abs(iv.lo), abs(iv.hi)) + 1
    return max(0, math.ceil(math.log2(bound)))


_BINARY = {
    "add": RatInterval.__add__,
    "sub": RatInterval.__sub__,
    "mul": RatInterval.__mul__,
    "min": RatInterval.min,
    "max": RatInterval.max,
}
_UNARY = {
    "neg": RatInterval.__neg__,
    "abs": RatInterval.__abs__,
}


def arith(
    op: str,
    x: ExactReal,
    y: Optional[ExactReal] = None,
    *,
    max_precision: Optional[int] = None,
) -> ExactReal:
    """Apply ``op`` to exact reals.

    The working precision starts a couple of bits above the target and is
    doubled until the result interval meets the width contract.
    """
    cap = MAX_PRECISION if max_precision is None else max_precision
    if op in _UNARY:
        if y is not None:
            raise TypeError(f"{op} takes one operand")
        f1 = _UNARY[op]

        def approx(p: int) -> RatInterval:
            return _compact(f1(x.approx(p + 1)), p)

        exact = None if x.exact is None else _exact_unary(op, x.exact)
        return ExactReal(approx, exact=exact)

    if op not in _BINARY:
        raise ValueError(f"unknown operation {op!r}")
    if y is None:
        raise TypeError(f"{op} takes two operands")
    f2 = _BINARY[op]
    extra = 2 if op != "mul" else 2 + _magnitude_bits(x) + _magnitude_bits(y)

    def approx(p: int) -> RatInterval:
        target = dyadic(p + 1)
        q = p + extra
        while True:
            if q > cap:
                raise PrecisionLimitError(
                    f"{op}: working precision {q} exceeds limit {cap}"
                )
            iv = f2(x.approx(q), y.approx(q))
            if iv.width <= target:
                return _compact(iv, p)
            q *= 2

    exact = None
    if x.exact is not None and y.exact is not None:
        exact = _exact_binary(op, x.exact, y.exact)
    return ExactReal(approx, exact=exact)


def _exact_unary(op: str, a: Fraction) -> Fraction:
    return -a if op == "neg" else abs(a)


def _exact_binary(op: str, a: Fraction, b: Fraction) -> Fraction:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "min":
        return min(a, b)
    return max(a, b)


class Side(enum.Enum):
    """Result of :func:`split`.  ``BELOW`` certifies ``x < b``; ``ABOVE``
    certifies ``x > a``."""

    BELOW = "IsBelow"
    ABOVE = "IsAbove"


class Sign(enum.Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    SMALL = "Small"


def _precision_below(gap: Fraction) -> int:
    """Smallest ``p >= 0`` with ``2**-p < gap``."""
    p = 0
    while dyadic(p) >= gap:
        p += 1
    return p


def split(x: ExactReal, a: RationalLike, b: RationalLike) -> Side:
    """Decide ``x < b`` or ``x > a`` for ``a < b``.

    When both hold either answer may come back; the midpoint of one
    approximation is compared with ``(a + b) / 2``.
    """
    a, b = as_rational(a), as_rational(b)
    if not a < b:
        raise ValueError(f"split needs a < b, got a={a}, b={b}")
    p = _precision_below((b - a) / 2)
    iv = x.approx(p)
    return Side.BELOW if iv.mid < (a + b) / 2 else Side.ABOVE


def sign_or_small(x: ExactReal, eps: RationalLike) -> Sign:
    """Three-way split: ``x > eps/4``, ``x < -eps/4`` or ``|x| < eps/2``."""
    eps = as_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    p = _precision_below(eps / 8)
    m = x.approx(p).mid
    if m > 3 * eps / 8:
        return Sign.POSITIVE
    if m < -3 * eps / 8:
        return Sign.NEGATIVE
    return Sign.SMALL


def limit(seq) -> ExactReal:
    """The limit of a sequence carrying a Cauchy modulus.

    ``seq`` needs ``term(n) -> ExactReal`` and ``modulus(p) -> n`` with every
    term from ``modulus(p)`` on within ``2**-p`` of the limit.
    """

    def approx(p: int) -> RatInterval:
        n = seq.modulus(p + 2)
        iv = seq.term(n).approx(p + 2).widen(dyadic(p + 2))
        return _compact(iv, p) if iv.width <= dyadic(p + 1) else iv

    return ExactReal(approx)


def lower_bound_bits(x: ExactReal, max_precision: int = MAX_PRECISION) -> Optional[int]:
    """Find ``p`` with ``x > 2**-p`` certified, searching precision upward.

    Returns ``None`` when no such ``p`` is found below ``max_precision``
    (i.e. positivity of ``x`` is not established).
    """
    p = 1
    while p <= max_precision:
        iv = x.approx(p)
        if iv.lo > 0:
            k = 0
            while dyadic(k) >= iv.lo:
                k += 1
            return k
        p += 1 if p < 16 else p // 4
    return None
