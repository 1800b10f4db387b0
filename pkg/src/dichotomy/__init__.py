"""Exact reals and evidence-carrying dichotomy algorithms on [0, 1]."""

from __future__ import annotations

from .dichotomies import (
    AEqualsB,
    ALessB,
    DistPositive,
    DistZero,
    FiniteApprox,
    SeparatedSeq,
    decompose_line,
    located_distance,
    neat_dichotomy,
    validate_neat_covering,
)
from .expr import InvalidExpression, compile_expr, compile_rational, interpret, parse, to_text
from .functions import (
    Budget,
    BudgetExhausted,
    Decided,
    Exhausted,
    LiftedFn,
    MonotoneFn,
    PreconditionFailed,
    RationalFn,
    RealFn,
    SpanFn,
    Staircase,
    StepFn,
    lift,
)
from .ishihara import AllBelow, EventuallyBelow, InfinitelyOften, WitnessAbove, trick_one, trick_two
from .ivt import Root, Stuck, approx_root
from .monotone import (
    Point,
    Star,
    enumerate_discontinuities,
    eps_steps,
    one_sided_limit,
    span_discontinuities,
)
from .quasiconvex import InfPositive, InfZeroEvidence, inf_dichotomy, quasiconvex_check
from .reals import ExactReal, RatInterval, Side, Sign, limit, sign_or_small, split
from .streams import (
    AllZero,
    BinarySeq,
    ConvergentSeq,
    FirstOneAt,
    Unknown,
    bounded_search_oracle,
    fixture_oracle,
    splice,
)

__all__ = [name for name in dir() if not name.startswith("_") and name != "annotations"]
