import json
import math

import pytest
from click.testing import CliRunner

from quasisl.cli import cli, main

PI = """
[interval]
a = 0
b = "pi"
"""

HALF = """
[interval]
a = 0
b = "inf"
"""

STEP = """
[interval]
a = 0
b = 1
[coefficients]
s = [ { from = 0, to = 0.5, kind = "constant", params = { value = 0 } },
      { from = 0.5, to = 1, kind = "constant", params = { value = 1 } } ]
q = [ { from = 0, to = 0.5, kind = "constant", params = { value = 0 } },
      { from = 0.5, to = 1, kind = "constant", params = { value = -1 } } ]
"""


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, text in (("pi", PI), ("half", HALF), ("step", STEP)):
        path = tmp_path / f"{name}.toml"
        path.write_text(text)
        out[name] = str(path)
    return out


def records(output):
    return [json.loads(line) for line in output.strip().splitlines()]


def run(*args):
    return CliRunner().invoke(cli, list(args), catch_exceptions=False)


def test_solve_records(files):
    res = run("solve", files["pi"], "--n-from", "1", "--n-to", "3", "--format", "records")
    assert res.exit_code == 0
    rows = records(res.output)
    assert [r["index"] for r in rows] == [1, 2, 3]
    for r in rows:
        assert r["lambda"] == pytest.approx(r["index"] ** 2, abs=1e-8)
        assert r["zeros"] == r["index"] - 1


def test_solve_table_and_mixed(files):
    res = run("solve", files["pi"], "--n-to", "2", "--delta", "pi/2")
    assert res.exit_code == 0
    lines = res.output.splitlines()
    assert lines[0].split() == ["index", "lambda", "residual", "zeros"]
    assert float(lines[1].split()[1]) == pytest.approx(0.25, abs=1e-8)


def test_tolerance_from_environment(files):
    res = CliRunner(env={"QUASISL_TOL": "1e-3"}).invoke(cli, ["solve", files["pi"], "--format", "records"])
    assert res.exit_code == 0
    assert records(res.output)[0]["lambda"] == pytest.approx(1.0, abs=1e-3)


def test_classify(files):
    res = run("classify", files["half"], "--format", "records")
    rec = records(res.output)[0]
    assert rec["regular"] is False
    assert rec["endpoint_b"] == "limit-point"
    assert "regular: true" in run("classify", files["pi"]).output


def test_monotonicity(files):
    res = run("monotonicity", files["pi"], "--intervals", "0,pi;0,pi/2;0,pi/4")
    assert res.exit_code == 0
    assert "verdict: STRICT" in res.output
    rows = records(run("monotonicity", files["pi"], "--intervals", "0,pi;0,pi/2", "--format", "records").output)
    assert rows[-1]["verdict"] == "STRICT"
    assert rows[1]["lambda1"] == pytest.approx(4.0, abs=1e-7)


def test_lowerbound(files):
    rec = records(run("lowerbound", files["step"], "--format", "records").output)[0]
    assert rec["lambda0"] == pytest.approx(7.764571943582431, abs=1e-7)
    rec = records(run("lowerbound", files["half"], "--format", "records").output)[0]
    assert 0.0 <= rec["lambda0"] <= 1e-4
    assert len(rec["truncation_trace"]) == 6


def test_disconjugacy(files):
    rec = records(run("disconjugacy", files["pi"], "--lambda", "2", "--format", "records").output)[0]
    assert rec["disconjugate"] is False
    assert rec["zeros"][1] == pytest.approx(math.pi / math.sqrt(2), abs=1e-8)
    assert "True" in run("disconjugacy", files["pi"], "--lambda", "0.5").output


def test_boundaryvalues(files):
    res = run("boundaryvalues", files["pi"], "--lambda0", "0.5", "--solution", "pi/2,1,0,1", "--format", "records")
    rec = records(res.output)[0]
    # cos(x - pi/2) = sin x: u(0) = 0, u1(0) = 1, u(pi) = 0, u1(pi) = -1
    assert rec["g_tilde_a"] == pytest.approx(0.0, abs=1e-8)
    assert rec["g_tilde_prime_a"] == pytest.approx(1.0, abs=1e-8)
    assert rec["g_tilde_prime_b"] == pytest.approx(-1.0, abs=1e-8)


def test_identities(files):
    res = run("identities", files["pi"], "--lambda0", "0.5", "--samples", "4", "--format", "records")
    rows = {r["check"]: r for r in records(res.output)}
    assert rows["q_recovery"]["value"] < 1e-8
    assert rows["jacobi"]["order"] >= 1.9
    assert rows["integrand"]["order"] >= 1.9
    assert rows["energy_gap"]["value"] < 1e-6
    assert rows["energy_margin_min"]["value"] > 0


def test_exit_codes(files, tmp_path, capsys):
    assert main(["solve", files["pi"]]) == 0
    capsys.readouterr()
    bad = tmp_path / "bad.toml"
    bad.write_text('[interval]\na = 0\nb = 1\n[coefficients]\np = -1\n')
    assert main(["solve", str(bad)]) == 1
    err = capsys.readouterr().err.strip()
    assert err.startswith("error:") and "\n" not in err
    assert main(["solve", files["half"]]) == 1
    assert main(["solve", files["pi"], "--n-from", "3", "--n-to", "1"]) == 1
    assert main(["lowerbound", files["pi"], "--ceiling", "0.5"]) == 2
    assert "numerical failure" in capsys.readouterr().err
    assert main(["nonsense"]) == 1


def test_records_round_trip_bit_exact(files):
    from quasisl import eigenvalue, load_problem

    rows = records(run("solve", files["pi"], "--n-to", "3", "--format", "records").output)
    prob = load_problem(files["pi"])
    for row in rows:
        assert row["lambda"] == eigenvalue(prob, row["index"]).lam  # repr floats parse back exactly


def test_byte_identical_runs(files):
    for args in (
        ("identities", files["pi"], "--lambda0", "0.5", "--samples", "3"),
        ("lowerbound", files["half"], "--format", "records"),
        ("solve", files["step"], "--n-to", "2"),
    ):
        assert run(*args).output == run(*args).output


def test_unknown_flag_rejected(files):
    res = CliRunner().invoke(cli, ["solve", files["pi"], "--bogus"])
    assert res.exit_code != 0
    assert "No such option" in res.output
