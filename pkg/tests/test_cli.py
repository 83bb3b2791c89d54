import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from zetacf import cli
from zetacf.dyadic import Dyadic, dy_from_hex, parse_decimal
from zetacf.elementary import ComplexBall, ComplexDyadic


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_real_decimal():
    code, out, _ = call("--real", "2", "--bits", "64", "--format", "decimal")
    assert code == 0
    value, radius = out.split(" +/- ")
    assert len(value.split(".")[1]) == cli.decimal_digits(64) == 20
    assert abs(parse_decimal(value) - Fraction("1.644934066848226436472415")) < Fraction(2, 10**20)
    assert int(radius.strip().removeprefix("2^")) <= -64


def test_real_hex():
    code, out, _ = call("--real", "3", "--bits", "40", "--format", "hex")
    assert code == 0
    d = dy_from_hex(out.split(" +/- ")[0])
    assert abs(d.to_fraction() - Fraction("1.2020569031595942")) < Fraction(1, 2**39)


def test_json_schema_and_round_trip():
    code, out, _ = call("--real", "2.5", "--bits", "48", "--format", "json", "--verify")
    assert code == 0
    doc = json.loads(out)
    assert set(doc) >= {"mode", "s", "bits", "value", "radius_exp", "verified", "stats"}
    assert doc["mode"] == "real" and doc["s"] == "2.5" and doc["bits"] == 48
    assert doc["verified"] is True
    assert set(doc["stats"]) == {"peak_bits", "max_working_precision", "term_count", "op_count", "elapsed_ms"}
    exact = dy_from_hex(doc["hex"]).to_fraction()
    digits = cli.decimal_digits(48)
    assert abs(parse_decimal(doc["value"]) - exact) <= Fraction(1, 10**digits)


def test_complex_zero_verified():
    code, out, _ = call("--complex", "0.5", "14.134725141734693790", "--bits", "64", "--verify", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["verified"] is True and doc["mode"] == "complex"
    assert doc["s"] == ["0.5", "14.134725141734693790"]
    re, im = (parse_decimal(v) for v in doc["value"])
    assert re * re + im * im < Fraction(1, 10**12)


def test_complex_decimal_text():
    code, out, _ = call("--complex", "2", "1", "--bits", "20")
    assert code == 0 and "i +/- 2^-" in out
    assert int(out.strip().rsplit("2^", 1)[1]) <= -20


@pytest.mark.parametrize(
    "argv",
    [
        ("--real", "1", "--bits", "32"),
        ("--real", "0.5", "--bits", "32"),
        ("--real", "-2", "--bits", "8"),
        ("--complex", "1", "0", "--bits", "16"),
        ("--complex", "0", "5", "--bits", "16"),
    ],
)
def test_domain_errors_exit_3(argv):
    code, out, err = call(*argv)
    assert code == 3 and out == ""
    assert "s = 1" in err or "sigma" in err


@pytest.mark.parametrize(
    "argv",
    [
        ("--real", "abc", "--bits", "8"),
        ("--real", "2"),
        ("--real", "2", "--complex", "1", "2", "--bits", "8"),
        ("--real", "2", "--bits", "-1"),
        ("--real", "2", "--bits", "8", "--format", "xml"),
        ("--complex", "2", "1", "--bits", "8", "--p", "3"),
        (),
    ],
)
def test_usage_errors_exit_2(argv):
    code, _, _ = call(*argv)
    assert code == 2


def test_resource_caps_exit_4():
    assert call("--real", "2", "--bits", "500", "--max-bits", "200")[0] == 4
    assert call("--real", "2", "--bits", "500", "--max-terms", "50")[0] == 4
    assert call("--real", "2", "--bits", "500", "--timeout", "0")[0] == 4


def test_verify_null_outside_coverage():
    code, out, _ = call("--complex", "0.1", "2", "--bits", "12", "--verify", "--format", "json")
    assert code == 0 and json.loads(out)["verified"] is None
    code, out, _ = call("--complex", "0.1", "2", "--bits", "12", "--verify")
    assert code == 0 and "verified: null" in out


def test_verify_detects_corrupted_center(monkeypatch):
    def corrupt(ball):
        if isinstance(ball, ComplexBall):
            c = ball.center
            return ComplexBall(ComplexDyadic(c.re + Dyadic(1, -4), c.im), ball.radius_exp)
        return type(ball)(ball.center + Dyadic(1, -4), ball.radius_exp)

    monkeypatch.setattr(cli, "result_hook", corrupt)
    code, out, err = call("--real", "2", "--bits", "32", "--verify", "--format", "json")
    assert code == 5 and json.loads(out)["verified"] is False and "verification failed" in err
    code, _, _ = call("--complex", "2", "1", "--bits", "16", "--verify")
    assert code == 5


def test_stats_and_p_override():
    code, out, _ = call("--real", "2", "--bits", "32", "--stats", "--p", "3")
    assert code == 0
    stats = json.loads(out.splitlines()[1].removeprefix("stats: "))
    assert stats["term_count"] > 0
    assert call("--real", "9", "--bits", "16", "--p", "2")[0] == 3


def test_omega_binomials_flag():
    a = call("--real", "3", "--bits", "24", "--format", "hex")[1]
    b = call("--real", "3", "--bits", "24", "--format", "hex", "--binomials", "omega")[1]
    da, db = (dy_from_hex(x.split(" +/- ")[0]).to_fraction() for x in (a, b))
    assert abs(da - db) <= Fraction(2, 2**24)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "zetacf", "--real", "4", "--bits", "30"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("1.082323233")
    r = subprocess.run([sys.executable, "-m", "zetacf", "--real", "1", "--bits", "30"], capture_output=True, text=True)
    assert r.returncode == 3 and "s = 1" in r.stderr
