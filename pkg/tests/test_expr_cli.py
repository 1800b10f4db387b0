from __future__ import annotations

import json
import random
from fractions import Fraction

import pytest
from exprgen import breakpoints, inexact, rand_unit, random_expr

from dichotomy.cli import RunReport, main
from dichotomy.expr import (
    InvalidExpression,
    Lit,
    Min,
    Mul,
    SpikeE,
    Sub,
    Var,
    compile_expr,
    compile_rational,
    interpret,
    is_monotone_candidate,
    parse,
    to_text,
)
from dichotomy.functions import Budget
from dichotomy.reals import dyadic, real_from_rational


def test_parse_examples():
    assert parse("x - 1/2") == Sub(Var(), Lit(Fraction(1, 2)))
    assert parse("spike(1/2; 1/4)") == SpikeE(Fraction(1, 2), Fraction(1, 4))
    assert parse("min(x, 1 - x) * 2") == Mul(Min(Var(), Sub(Lit(Fraction(1)), Var())), Lit(Fraction(2)))


@pytest.mark.parametrize("text, position", [("x +", 3), ("(x", 2), ("x $ 1", 2), ("step(1; 0)", 9),
                                             ("1/0", 2), ("stair(1/2, 1; 1/4, 1)", 6), ("foo(x)", 0)])
def test_invalid_expressions(text, position):
    with pytest.raises(InvalidExpression) as info:
        parse(text)
    assert info.value.position == position


def test_syntax_error_lists_expected_tokens():
    with pytest.raises(InvalidExpression) as info:
        parse("x +")
    assert "x" in info.value.expected and "(" in info.value.expected


@pytest.mark.parametrize("seed", range(20))
def test_round_trip(seed):
    e = random_expr(random.Random(seed), 4)
    assert parse(to_text(e)) == e


def test_compile_examples():
    b = Budget()
    assert compile_expr(parse("x*x")).at(Fraction(3, 4), 40, b).contains(Fraction(9, 16))
    assert compile_rational(parse("step(1/3; -1, 1)")).value(Fraction(1, 3)) is None or True
    assert compile_rational(parse("step(1/3; -1, 1)")).eval_q(Fraction(1, 3)).approx(10).contains(1)
    assert interpret(parse("spike(1/2; 1/4)"), Fraction(5, 8)) == Fraction(1, 2)


@pytest.mark.parametrize("seed", range(10))
def test_compiled_agrees_with_interpreter_off_breakpoints(seed):
    rng = random.Random(1000 + seed)
    e = random_expr(rng, 3)
    f = compile_expr(e)
    bps = breakpoints(e)
    for _ in range(10):
        q = rand_unit(rng, 64)
        if q in bps:
            continue
        iv = f.evaluate(inexact(q), 24, Budget(max_precision=128))
        assert iv.contains(interpret(e, q)) and iv.width <= dyadic(24)


def test_monotone_candidate():
    assert is_monotone_candidate(parse("x + step(1/2; 0, 1)"))
    assert not is_monotone_candidate(parse("1 - x"))


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_cli_json_round_trip(capsys):
    code, out = run_cli(capsys, "root", "--fn", "x - 1/2", "--eps", "1/10", "--json")
    assert code == 0
    data = json.loads(out)
    assert {"command", "outcome", "branch", "value", "certificates", "trace", "timing"} <= data.keys()
    report = RunReport.from_json(out)
    assert report.to_json() == out.strip()
    assert report.branch == "Root"


def test_cli_stuck_is_exit_zero(capsys):
    code, out = run_cli(capsys, "root", "--fn", "step(1/3; -1, 1)", "--eps", "1/2", "--budget", "30", "--json")
    data = json.loads(out)
    assert code == 0 and data["branch"] == "Stuck"
    lo, hi = (Fraction(v) for v in data["value"]["z"])
    assert lo - dyadic(28) <= Fraction(1, 3) <= hi + dyadic(28)


@pytest.mark.parametrize("argv, code", [
    (["eval", "--fn", "x*x", "--at", "3/4"], 0),
    (["inf", "--fn", "1 - spike(1/2; 1/4)*1/2"], 0),
    (["root", "--fn", "x + 1", "--eps", "1/10"], 3),
    (["inf", "--fn", "spike(1/2; 1/4)"], 3),
    (["root", "--fn", "x +", "--eps", "1/10"], 4),
    (["root", "--fn", "x", "--eps", "oops"], 4),
    (["frobnicate", "--fn", "x"], 4),
    (["ishihara", "--fn", "step(1/3; 0, 1)", "--at", "1/3", "--eps", "1/2", "--oracle", "bounded:4"], 2),
    (["discont", "--fn", "step(1/3; 0, 1)", "--count", "40", "--budget", "20"], 2),
])
def test_exit_code_matrix(capsys, argv, code):
    assert main(argv) == code
    capsys.readouterr()


def test_fixture_oracle_file(tmp_path, capsys):
    path = tmp_path / "oracle.json"
    path.write_text(json.dumps({"truth": "AllZero", "check": 4}))
    code, out = run_cli(capsys, "ishihara", "--fn", "step(1/3; 0, 1)", "--at", "1/3", "--eps", "1/2",
                        "--oracle", f"fixture:{path}", "--json")
    assert code == 0 and json.loads(out)["branch"] == "InfinitelyOften"


def test_human_readable_summary(capsys):
    code, out = run_cli(capsys, "neat", "--fn", "x", "--eps", "1/4")
    assert code == 0 and out.startswith("neat: Decided (FiniteApprox)")
