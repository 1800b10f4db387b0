"""Command-line front end.

Exit codes: 0 when the procedure decided a branch (including stuck-bisection
and infimum-zero evidence), 2 when it ran out of budget, 3 when a
precondition failed, 4 on an invalid expression or invalid arguments.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence

from .dichotomies import FiniteApprox, dyadic_enumeration, neat_dichotomy
from .expr import InvalidExpression, compile_expr, compile_rational, interpret, parse
from .functions import Budget, BudgetExhausted, Decided, Exhausted, MonotoneFn, PreconditionFailed
from .ishihara import EventuallyBelow, WitnessAbove, trick_one, trick_two
from .ivt import Root, approx_root
from .monotone import Point, enumerate_discontinuities, eps_steps
from .quasiconvex import InfPositive, enclosure_oracle, inf_dichotomy
from .reals import RatInterval, as_rational, real_from_rational
from .streams import (
    AllZero,
    ConvergentSeq,
    FirstOneAt,
    bounded_search_oracle,
    fixture_oracle,
)

EXIT_DECIDED = 0
EXIT_EXHAUSTED = 2
EXIT_PRECONDITION = 3
EXIT_INVALID = 4

COMMANDS = ("eval", "root", "steps", "discont", "inf", "ishihara", "neat")


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    command: str
    outcome: str
    branch: Optional[str] = None
    value: Any = None
    certificates: dict = field(default_factory=dict)
    trace: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> RunReport:
        return cls(**json.loads(text))

    @property
    def exit_code(self) -> int:
        return {
            "Decided": EXIT_DECIDED,
            "Exhausted": EXIT_EXHAUSTED,
            "PreconditionFailed": EXIT_PRECONDITION,
            "InvalidExpression": EXIT_INVALID,
        }[self.outcome]

    def summary(self) -> str:
        lines = [f"{self.command}: {self.outcome}" + (f" ({self.branch})" if self.branch else "")]
        if self.value is not None:
            lines.append(f"  value: {json.dumps(self.value)}")
        for k, v in sorted(self.certificates.items()):
            lines.append(f"  {k}: {json.dumps(v)}")
        if self.trace:
            lines.append("  trace: " + ", ".join(f"{k}={v}" for k, v in sorted(self.trace.items())))
        return "\n".join(lines)


def _iv(iv: RatInterval) -> list[str]:
    return [str(iv.lo), str(iv.hi)]


def _budget_trace(budget: Budget) -> dict:
    d = budget.diagnostics()
    return {"queries": d["queries"], "deepest_precision": d["deepest_precision"]}


def _rational(text: str, name: str) -> Fraction:
    try:
        return as_rational(text)
    except (ValueError, ZeroDivisionError, TypeError):
        raise UsageError(f"--{name} must be a rational like 3/4, got {text!r}") from None


def _oracle(spec: Optional[str]):
    if spec is None:
        return None
    kind, _, arg = spec.partition(":")
    if kind == "bounded":
        try:
            return bounded_search_oracle(int(arg))
        except ValueError:
            raise UsageError(f"bad bounded oracle {spec!r}") from None
    if kind == "fixture":
        try:
            with open(arg, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise UsageError(f"cannot read oracle fixture {arg!r}: {err}") from None
        check = int(data.get("check", 32))
        if data.get("truth") == "AllZero":
            return fixture_oracle(AllZero(), check)
        if data.get("truth") == "FirstOneAt":
            return fixture_oracle(FirstOneAt(int(data["n"])), check)
        raise UsageError("oracle fixture truth must be AllZero or FirstOneAt")
    raise UsageError(f"oracle must be bounded:<N> or fixture:<file>, got {spec!r}")


# -- subcommands ----------------------------------------------------------------


def _cmd_eval(e, args, budget: Budget, report: RunReport):
    f = compile_expr(e)
    at = _rational(args.at, "at")
    res = f.eval(real_from_rational(at), args.precision, budget)
    if isinstance(res, Exhausted):
        return res
    report.branch = "Value"
    report.value = _iv(res.value)
    report.certificates["interpreter"] = str(interpret(e, at))
    return res


def _cmd_root(e, args, budget: Budget, report: RunReport):
    res = approx_root(compile_expr(e), args.eps, budget)
    if isinstance(res, Exhausted):
        return res
    r = res.value
    if isinstance(r, Root):
        report.branch = "Root"
        report.value = {"z": _iv(r.z.approx(args.precision)),
                        "point": None if r.point is None else str(r.point)}
        report.certificates = {"value_bound": str(r.value_bound),
                               "value_enclosure": None if r.value is None else _iv(r.value)}
    else:
        ev = r.evidence
        report.branch = "Stuck"
        report.value = {"z": _iv(ev.z.approx(args.precision))}
        report.certificates = {
            "side": ev.side,
            "gap_certificate": str(ev.gap_certificate),
            "product_bound": str(ev.product_bound),
        }
    report.trace["steps"] = len(r.trace)
    return res


def _cmd_steps(e, args, budget: Budget, report: RunReport):
    f = compile_rational(e)
    res = eps_steps(MonotoneFn(f), args.eps, budget)
    if isinstance(res, Exhausted):
        return res
    part = res.value
    report.branch = "StepPartition"
    report.value = [{"flag": pt.flag, "enclosure": _iv(pt.enclosure)} for pt in part.points]
    rng = random.Random(args.seed)
    worst = Fraction(0)
    for lo, hi in part.open_intervals():
        for _ in range(20):
            a = lo + (hi - lo) * Fraction(rng.randint(1, 999), 1000)
            b = lo + (hi - lo) * Fraction(rng.randint(1, 999), 1000)
            worst = max(worst, abs(interpret(e, a) - interpret(e, b)))
    report.certificates["sampled_variation"] = str(worst)
    return res


def _cmd_discont(e, args, budget: Budget, report: RunReport):
    res = enumerate_discontinuities(MonotoneFn(compile_rational(e)), args.count, budget)
    if isinstance(res, Exhausted):
        return res
    report.branch = "DiscontinuityStream"
    report.value = [
        {"point": _iv(x.enclosure), "gap_lower": str(x.gap_lower), "level": x.level}
        if isinstance(x, Point) else "*"
        for x in res.value
    ]
    return res


def _cmd_inf(e, args, budget: Budget, report: RunReport):
    f = compile_rational(e)
    res = inf_dichotomy(f, enclosure_oracle(f), True, budget)
    if isinstance(res, Exhausted):
        return res
    r = res.value
    if isinstance(r, InfPositive):
        report.branch = "InfPositive"
        report.value = {"lower": str(r.lower)}
        report.certificates["witness"] = _iv(r.witness_mid.approx(args.precision))
    else:
        report.branch = "InfZeroEvidence"
        report.value = {"z": _iv(r.z.approx(min(args.precision, 16)))}
        report.certificates["approach"] = [[n, str(y), _iv(v)] for n, y, v in r.values[:8]]
        report.certificates["value_at_z"] = None if r.value_at_z is None else _iv(r.value_at_z)
    return res


def _cmd_ishihara(e, args, budget: Budget, report: RunReport):
    f = compile_expr(e)
    at = _rational(args.at, "at")
    # approach from the left unless at = 0; steps are right-continuous, so a
    # left approach keeps the sequence off the step's own breakpoint
    xs = ConvergentSeq.geometric(at, Fraction(1, 2), -1 if at > 0 else 1)
    oracle = _oracle(args.oracle)
    if oracle is None:
        res = trick_one(f, xs, args.eps / 2, args.eps, budget)
        if isinstance(res, Exhausted):
            return res
        r = res.value
        if isinstance(r, WitnessAbove):
            report.branch = "WitnessAbove"
            report.value = {"n": r.n}
            report.certificates["certified_gap"] = str(r.certified_gap)
        else:
            report.branch = "AllBelow"
            report.value = {"beta": str(r.beta)}
        return res
    res = trick_two(f, xs, args.eps, oracle, budget)
    if isinstance(res, Exhausted):
        return res
    r = res.value
    if isinstance(r, EventuallyBelow):
        report.branch = "EventuallyBelow"
        report.value = {"N": r.N}
    else:
        report.branch = "InfinitelyOften"
        report.value = {"indices": r.evidence.take(5)}
    return res


def _cmd_neat(e, args, budget: Budget, report: RunReport):
    if args.index:
        points = lambda i: interpret(e, Fraction(i))  # noqa: E731
    else:
        points = lambda i: interpret(e, dyadic_enumeration(i))  # noqa: E731
    res = neat_dichotomy(points, args.eps, budget, scan=args.scan, max_points=args.count)
    if isinstance(res, Exhausted):
        return res
    r = res.value
    if isinstance(r, FiniteApprox):
        report.branch = "FiniteApprox"
        report.value = [_iv(x.approx(args.precision)) for x in r.points]
        report.certificates["scanned"] = r.scanned
    else:
        report.branch = "SeparatedSeq"
        report.value = [_iv(x.approx(args.precision)) for x in r.prefix]
        report.certificates["indices"] = list(r.indices)
    return res


_HANDLERS = {
    "eval": _cmd_eval,
    "root": _cmd_root,
    "steps": _cmd_steps,
    "discont": _cmd_discont,
    "inf": _cmd_inf,
    "ishihara": _cmd_ishihara,
    "neat": _cmd_neat,
}


# -- driver ---------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--fn", required=True, help="function expression in x")
    common.add_argument("--eps", default="1/10", help="rational tolerance")
    common.add_argument("--precision", type=int, default=32, help="output precision in bits")
    common.add_argument("--budget", type=int, default=40, help="precision budget in bits")
    common.add_argument("--oracle", default=None, help="bounded:<N> or fixture:<file>")
    common.add_argument("--json", action="store_true", help="emit a JSON report")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
    common.add_argument("--at", default="1/2", help="rational point (eval, ishihara)")
    common.add_argument("--count", type=int, default=20, help="entries or packing size")
    common.add_argument("--scan", type=int, default=256, help="points scanned by neat")
    common.add_argument("--index", action="store_true", help="neat: use f(1), f(2), ...")
    parser = _Parser(prog="dichotomy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def run(command: str, args: argparse.Namespace) -> RunReport:
    report = RunReport(command=command, outcome="Decided")
    report.inputs = {k: v for k, v in vars(args).items() if k != "command"}
    start = time.perf_counter()
    budget = Budget(max_precision=args.budget)
    try:
        args.eps = _rational(args.eps, "eps") if isinstance(args.eps, str) else args.eps
        e = parse(args.fn)
        res = _HANDLERS[command](e, args, budget, report)
        if isinstance(res, Exhausted):
            report.outcome = "Exhausted"
            report.branch = None
            report.certificates = {"reason": res.reason,
                                   "last_candidate": res.last_candidate,
                                   "extra": {k: str(v) for k, v in res.extra.items()}}
        elif not isinstance(res, Decided):
            raise TypeError(f"unexpected result {res!r}")
    except InvalidExpression as err:
        report.outcome = "InvalidExpression"
        report.certificates = {"message": str(err), "position": err.position,
                               "expected": sorted(err.expected)}
    except BudgetExhausted as err:
        # raised lazily, e.g. while drawing evidence indices
        report.outcome = "Exhausted"
        report.branch = None
        report.certificates = {"reason": err.reason}
    except PreconditionFailed as err:
        report.outcome = "PreconditionFailed"
        report.certificates = {"reason": err.reason,
                               "details": {k: str(v) for k, v in err.details.items()}}
    report.trace.update(_budget_trace(budget))
    report.timing = {"seconds": round(time.perf_counter() - start, 6)}
    return report


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    try:
        report = run(args.command, args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    print(report.to_json() if args.json else report.summary())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
