import io
import json
import math
import re

import pytest

from regint import __version__
from regint.cli import (EXIT_DIVERGED, EXIT_INCONCLUSIVE, EXIT_OK, EXIT_USAGE, UsageError, parse_init, parse_term, run,
                        to_json)
from regint.zlimit import CSV_HEADER

HEADER = "level,param,raw_estimate,extrapolated,abs_diff"


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(scope="module")
def example1_json():
    return cli("eval", "--g", "sin(1/u)/u^2", "--beta", "1", "--init", "smoothstep", "--format", "json")


def test_example1_json(example1_json):
    code, out, _ = example1_json
    assert code == EXIT_OK
    obj = json.loads(out)
    assert obj["status"] == "converged"
    assert obj["value"] == pytest.approx(math.cos(1.0), abs=1e-6)
    assert obj["version"] == __version__
    assert {"value", "status", "error_estimate", "trace"} <= set(obj)


def test_json_digits_and_determinism(example1_json):
    _, out, _ = example1_json
    floats = re.findall(r"-?\d\.\d+e[+-]\d+", out)
    assert floats and all(len(f.split("e")[0].lstrip("-").replace(".", "")) >= 15 for f in floats)
    _, again, _ = cli("eval", "--g", "sin(1/u)/u^2", "--beta", "1", "--init", "smoothstep", "--format", "json")
    strip = lambda s: "\n".join(l for l in s.splitlines() if '"version"' not in l)
    assert strip(again) == strip(out)


@pytest.mark.parametrize("g", ["1/u", "1/u^2"])
def test_divergent_exit_code(g):
    code, out, _ = cli("eval", "--g", g, "--beta", "1", "--init", "ramp", "--format", "json")
    assert code == EXIT_DIVERGED
    assert json.loads(out)["status"] == "diverged"
    assert json.loads(out)["value"] is None


def test_inconclusive_exit_code():
    code, out, _ = cli("eval", "--g", "sin(1/u)/u^2", "--beta", "1", "--levels", "3", "--format", "text")
    assert code == EXIT_INCONCLUSIVE
    assert "inconclusive" in out


def test_sweep_example2_trace():
    code, out, _ = cli("sweep", "--g", "cos(1/u)/u^3", "--beta", "1", "--init", "smoothstep", "--levels", "17")
    lines = out.splitlines()
    assert lines[0] == HEADER == ",".join(CSV_HEADER)
    rows = [l.split(",") for l in lines[1:]]
    assert [int(r[0]) for r in rows] == list(range(len(rows)))
    # the direct form approaches -cos(1) - sin(1) before rounding in cos(1/u) dominates
    assert all(abs(float(r[3]) - (-math.cos(1.0) - math.sin(1.0))) < 1e-3 for r in rows[14:])
    assert code in (EXIT_OK, EXIT_INCONCLUSIVE)


def test_csv_uses_round_trip_floats():
    code, out, _ = cli("eval", "--g", "u^-0.5", "--beta", "1", "--format", "csv")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == HEADER
    for row in lines[1:]:
        for field in row.split(",")[1:]:
            if field != "nan":
                assert repr(float(field)) == field


def test_env_default_format(monkeypatch):
    monkeypatch.setenv("REGINT_FORMAT", "json")
    code, out, _ = cli("eval", "--g", "ln(u)", "--beta", "1")
    assert code == EXIT_OK
    assert json.loads(out)["value"] == pytest.approx(-1.0, abs=1e-8)


def test_antiderivative_and_hint_flags():
    code, out, _ = cli("eval", "--g", "sin(1/u)/u^2", "--G", "cos(1/u)", "--hint", "1/u^2",
                       "--beta", "0.5", "--init", "ramp", "--tol", "1e-7", "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["value"] == pytest.approx(math.cos(2.0), abs=1e-6)


def test_upper_critical_endpoint():
    code, out, _ = cli("eval", "--g", "sin(1/(1-u))/(1-u)^2", "--hint", "1/(1-u)^2", "--beta", "1",
                       "--critical", "upper", "--tol", "1e-6", "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["value"] == pytest.approx(math.cos(1.0), abs=1e-5)


def test_eval_inf_termination_and_map():
    code, out, _ = cli("eval-inf", "--f", "exp(-x)", "--a", "1", "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["value"] == pytest.approx(math.exp(-1.0), abs=1e-8)
    code, out, _ = cli("eval-inf", "--f", "cos(x)", "--a", "1", "--map", "power:1", "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["value"] == pytest.approx(-math.sin(1.0), abs=1e-8)
    code, out, _ = cli("eval-inf", "--f", "sin(x)", "--a", "1", "--term", "uniform:6.283185307179586",
                       "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["value"] == pytest.approx(math.cos(1.0), abs=1e-8)


def test_expression_error_reports_flag_and_caret():
    code, out, err = cli("eval", "--g", "1/+", "--beta", "1")
    assert code == EXIT_USAGE and out == ""
    assert "--g" in err
    lines = err.splitlines()
    caret = next(l for l in lines if l.strip() == "^")
    expr = lines[lines.index(caret) - 1]
    assert expr[caret.index("^")] == "+"


@pytest.mark.parametrize("argv", [
    ["eval", "--beta", "1"],
    ["eval", "--g", "u", "--beta", "1", "--init", "triangle"],
    ["eval", "--g", "u", "--beta", "1", "--format", "xml"],
    ["eval", "--g", "u * y", "--beta", "1"],
    ["eval-inf", "--f", "exp(-x)", "--a", "1", "--map", "log:2"],
    ["sweep", "--beta", "1"],
    ["bogus"],
])
def test_usage_errors_exit_1(argv):
    code, _, err = cli(*argv)
    assert code == EXIT_USAGE
    assert "error" in err


def test_usage_error_names_grammar():
    _, _, err = cli("eval", "--g", "u", "--beta", "1", "--init", "triangle")
    assert "--init" in err and "combine:" in err


def test_props_list_and_only():
    code, out, _ = cli("props", "--list")
    assert code == EXIT_OK
    names = out.split()
    assert len(names) == len(set(names)) and any(n.startswith("interchange/") for n in names)
    code, out, _ = cli("props", "--only", "round_trip")
    assert code == EXIT_OK
    assert out.splitlines()[-1] == "3 checks, 0 failed, 0 skipped"
    code, out, _ = cli("props", "--only", "round_trip", "--format", "json")
    assert [o["passed"] for o in json.loads(out)] == [True] * 3


def test_version_flag():
    code, out, _ = cli("--version")
    assert code == EXIT_OK and __version__ in out


def test_flag_grammars():
    assert parse_init("combine:ramp,smoothstep").kind == "tabulated"
    assert parse_init("from-z:2").epsilon == pytest.approx(math.exp(-2.0))
    assert parse_init("from-z:1:3").epsilon == pytest.approx(math.exp(-3.0))
    assert parse_term("bspline:4:3").c == 4.0
    for bad in ("combine:ramp", "from-z:x", "ramp:1"):
        with pytest.raises(UsageError):
            parse_init(bad)
    with pytest.raises(UsageError):
        parse_term("uniform:-1")


def test_to_json_formatting():
    assert to_json({"a": 0.1, "b": [1, None, math.inf], "c": True}) == \
        '{\n  "a": 1.0000000000000001e-01,\n  "b": [1, null, null],\n  "c": true\n}'
