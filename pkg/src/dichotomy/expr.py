"""A small expression language for test functions on [0, 1].

Grammar::

    expr     := term (('+' | '-') term)*
    term     := factor ('*' factor)*
    factor   := rational | 'x' | '-' factor | fn '(' args ')' | '(' expr ')'
    fn       := abs | min | max | spike | step | stair | scale
    rational := int ('/' posint)?

``abs(e)``, ``min(e, e)`` and ``max(e, e)`` take expressions.  The fixture
functions take signed rational literals: ``spike(z; eps)``,
``step(c; lo, hi)``, ``stair(c1, jump1; c2, jump2; ...)`` and
``scale(k, e)`` (a rational times an expression).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .functions import LiftedFn, RationalFn, Staircase, StepFn
from .quasiconvex import Spike
from .reals import RatInterval


class InvalidExpression(ValueError):
    def __init__(self, message: str, position: int, expected: frozenset[str] = frozenset()):
        self.position = position
        self.expected = frozenset(expected)
        detail = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{message} at position {position}{detail}")


# -- abstract syntax ------------------------------------------------------------


@dataclass(frozen=True)
class Lit:
    value: Fraction

    def __post_init__(self) -> None:
        if self.value < 0:
            raise ValueError("literals are non-negative; wrap negatives in Neg")


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Add:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Neg:
    arg: Expr


@dataclass(frozen=True)
class Abs:
    arg: Expr


@dataclass(frozen=True)
class Min:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Max:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class SpikeE:
    z: Fraction
    eps: Fraction


@dataclass(frozen=True)
class StepE:
    c: Fraction
    lo: Fraction
    hi: Fraction


@dataclass(frozen=True)
class StairE:
    pairs: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self) -> None:
        cs = [c for c, _ in self.pairs]
        if not cs or any(a >= b for a, b in zip(cs, cs[1:])):
            raise ValueError("stair breakpoints must be strictly increasing")


@dataclass(frozen=True)
class Scale:
    k: Fraction
    arg: Expr


Expr = Union[Lit, Var, Add, Sub, Mul, Neg, Abs, Min, Max, SpikeE, StepE, StairE, Scale]


def lit(q: Union[Fraction, int, str]) -> Expr:
    """Literal for any rational, negatives as ``Neg(Lit(-q))``."""
    q = Fraction(q)
    return Lit(q) if q >= 0 else Neg(Lit(-q))


# -- tokens and parser -------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[a-z]+)|(?P<op>[-+*/(),;]))")
_FUNCS = ("abs", "min", "max", "spike", "step", "stair", "scale")
_FACTOR_START = frozenset({"rational", "x", "-", "("} | set(_FUNCS))


@dataclass(frozen=True)
class _Tok:
    kind: str  # "int" | "name" | "op" | "end"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise InvalidExpression(f"unexpected character {text[bad]!r}", bad, _FACTOR_START)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def _fail(self, expected) -> InvalidExpression:
        t = self.tok
        what = "end of input" if t.kind == "end" else repr(t.text)
        return InvalidExpression(f"unexpected {what}", t.pos, frozenset(expected))

    def _accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def _expect(self, text: str) -> None:
        if not self._accept(text):
            raise self._fail({text})

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise self._fail({"+", "-", "*", "end of input"})
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            if self._accept("+"):
                e = Add(e, self.term())
            elif self._accept("-"):
                e = Sub(e, self.term())
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while self._accept("*"):
            e = Mul(e, self.factor())
        return e

    def factor(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            return Lit(self.rational())
        if self._accept("-"):
            return Neg(self.factor())
        if self._accept("("):
            e = self.expr()
            self._expect(")")
            return e
        if t.kind == "name":
            if t.text == "x":
                self.i += 1
                return Var()
            if t.text in _FUNCS:
                self.i += 1
                self._expect("(")
                e = getattr(self, "_fn_" + t.text)()
                self._expect(")")
                return e
            raise InvalidExpression(f"unknown name {t.text!r}", t.pos, _FACTOR_START)
        raise self._fail(_FACTOR_START)

    def rational(self) -> Fraction:
        t = self.tok
        if t.kind != "int":
            raise self._fail({"rational"})
        self.i += 1
        num = int(t.text)
        if self._accept("/"):
            d = self.tok
            if d.kind != "int" or int(d.text) == 0:
                raise self._fail({"positive integer"})
            self.i += 1
            return Fraction(num, int(d.text))
        return Fraction(num)

    def signed(self) -> Fraction:
        if self._accept("-"):
            return -self.rational()
        return self.rational()

    def _fn_abs(self) -> Expr:
        return Abs(self.expr())

    def _fn_min(self) -> Expr:
        a = self.expr()
        self._expect(",")
        return Min(a, self.expr())

    def _fn_max(self) -> Expr:
        a = self.expr()
        self._expect(",")
        return Max(a, self.expr())

    def _fn_spike(self) -> Expr:
        pos = self.tok.pos
        z = self.signed()
        self._expect(";")
        eps = self.signed()
        if eps <= 0:
            raise InvalidExpression("spike width must be positive", pos, frozenset({"rational"}))
        return SpikeE(z, eps)

    def _fn_step(self) -> Expr:
        c = self.signed()
        self._expect(";")
        lo = self.signed()
        self._expect(",")
        return StepE(c, lo, self.signed())

    def _fn_stair(self) -> Expr:
        pos = self.tok.pos
        pairs = []
        while True:
            c = self.signed()
            self._expect(",")
            pairs.append((c, self.signed()))
            if not self._accept(";"):
                break
        try:
            return StairE(tuple(pairs))
        except ValueError as err:
            raise InvalidExpression(str(err), pos) from None

    def _fn_scale(self) -> Expr:
        k = self.signed()
        self._expect(",")
        return Scale(k, self.expr())


def parse(text: str) -> Expr:
    """Parse an expression, raising :class:`InvalidExpression` on error."""
    return _Parser(text).parse()


# -- printing -----------------------------------------------------------------------


def _q(q: Fraction) -> str:
    return str(q)


def _prec(e: Expr) -> int:
    if isinstance(e, (Add, Sub)):
        return 1
    if isinstance(e, Mul):
        return 2
    if isinstance(e, Neg):
        return 3
    return 4


def _wrap(e: Expr, least: int) -> str:
    s = to_text(e)
    return f"({s})" if _prec(e) < least else s


def to_text(e: Expr) -> str:
    """Canonical text; ``parse(to_text(e)) == e``."""
    if isinstance(e, Lit):
        return _q(e.value)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Add):
        return f"{_wrap(e.left, 1)} + {_wrap(e.right, 2)}"
    if isinstance(e, Sub):
        return f"{_wrap(e.left, 1)} - {_wrap(e.right, 2)}"
    if isinstance(e, Mul):
        return f"{_wrap(e.left, 2)} * {_wrap(e.right, 3)}"
    if isinstance(e, Neg):
        return f"-{_wrap(e.arg, 3)}"
    if isinstance(e, Abs):
        return f"abs({to_text(e.arg)})"
    if isinstance(e, Min):
        return f"min({to_text(e.left)}, {to_text(e.right)})"
    if isinstance(e, Max):
        return f"max({to_text(e.left)}, {to_text(e.right)})"
    if isinstance(e, SpikeE):
        return f"spike({_q(e.z)}; {_q(e.eps)})"
    if isinstance(e, StepE):
        return f"step({_q(e.c)}; {_q(e.lo)}, {_q(e.hi)})"
    if isinstance(e, StairE):
        return "stair(" + "; ".join(f"{_q(c)}, {_q(j)}" for c, j in e.pairs) + ")"
    if isinstance(e, Scale):
        return f"scale({_q(e.k)}, {to_text(e.arg)})"
    raise TypeError(f"not an expression: {e!r}")


# -- evaluation ---------------------------------------------------------------------


def interpret(e: Expr, q: Fraction) -> Fraction:
    """Exact value at a rational point, by direct recursion."""
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        return q
    if isinstance(e, Add):
        return interpret(e.left, q) + interpret(e.right, q)
    if isinstance(e, Sub):
        return interpret(e.left, q) - interpret(e.right, q)
    if isinstance(e, Mul):
        return interpret(e.left, q) * interpret(e.right, q)
    if isinstance(e, Neg):
        return -interpret(e.arg, q)
    if isinstance(e, Abs):
        return abs(interpret(e.arg, q))
    if isinstance(e, Min):
        return min(interpret(e.left, q), interpret(e.right, q))
    if isinstance(e, Max):
        return max(interpret(e.left, q), interpret(e.right, q))
    if isinstance(e, SpikeE):
        return max(Fraction(0), 1 - abs(q - e.z) / e.eps)
    if isinstance(e, StepE):
        return e.hi if q >= e.c else e.lo
    if isinstance(e, StairE):
        return sum((j for c, j in e.pairs if q >= c), Fraction(0))
    if isinstance(e, Scale):
        return e.k * interpret(e.arg, q)
    raise TypeError(f"not an expression: {e!r}")


def _enclose(e: Expr, iv: RatInterval, p: int) -> RatInterval:
    if isinstance(e, Lit):
        return RatInterval.point(e.value)
    if isinstance(e, Var):
        return iv
    if isinstance(e, Add):
        return _enclose(e.left, iv, p) + _enclose(e.right, iv, p)
    if isinstance(e, Sub):
        return _enclose(e.left, iv, p) - _enclose(e.right, iv, p)
    if isinstance(e, Mul):
        return _enclose(e.left, iv, p) * _enclose(e.right, iv, p)
    if isinstance(e, Neg):
        return -_enclose(e.arg, iv, p)
    if isinstance(e, Abs):
        return abs(_enclose(e.arg, iv, p))
    if isinstance(e, Min):
        return _enclose(e.left, iv, p).min(_enclose(e.right, iv, p))
    if isinstance(e, Max):
        return _enclose(e.left, iv, p).max(_enclose(e.right, iv, p))
    if isinstance(e, SpikeE):
        return Spike(e.z, e.eps).enclose(iv, p)
    if isinstance(e, StepE):
        return StepFn(e.c, e.lo, e.hi).enclose(iv, p)
    if isinstance(e, StairE):
        return Staircase(e.pairs).enclose(iv, p)
    if isinstance(e, Scale):
        return _enclose(e.arg, iv, p).scale(e.k)
    raise TypeError(f"not an expression: {e!r}")


class ExprFn(RationalFn):
    """Interval extension of an expression; exact on degenerate intervals."""

    def __init__(self, e: Expr):
        self.expr = e
        self.label = to_text(e)

    def enclose(self, iv: RatInterval, p: int) -> RatInterval:
        return _enclose(self.expr, iv, p)


def compile_rational(e: Expr) -> ExprFn:
    return ExprFn(e)


def compile_expr(e: Expr) -> LiftedFn:
    """Real-function evaluator refining the argument until the interval
    extension is narrow enough."""
    return LiftedFn(ExprFn(e))


def is_monotone_candidate(e: Expr) -> Optional[bool]:
    """True when the expression is syntactically increasing in ``x``.

    Sums, positive scalings, min/max, non-negative staircases and steps with
    ``lo <= hi`` of increasing parts qualify.  Used only to pick defaults.
    """
    if isinstance(e, (Lit,)):
        return True
    if isinstance(e, Var):
        return True
    if isinstance(e, (Add, Min, Max)):
        return bool(is_monotone_candidate(e.left) and is_monotone_candidate(e.right))
    if isinstance(e, StepE):
        return e.lo <= e.hi
    if isinstance(e, StairE):
        return all(j >= 0 for _, j in e.pairs)
    if isinstance(e, Scale):
        return e.k >= 0 and bool(is_monotone_candidate(e.arg))
    if isinstance(e, Mul) and isinstance(e.left, Lit):
        return bool(is_monotone_candidate(e.right))
    if isinstance(e, Mul) and isinstance(e.right, Lit):
        return bool(is_monotone_candidate(e.left))
    if isinstance(e, Sub) and isinstance(e.right, Lit):
        return bool(is_monotone_candidate(e.left))
    return False
