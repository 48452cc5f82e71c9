import math

from typer.testing import CliRunner

from riskscale.cli.main import app as root_app


def _fields(output):
    out = {}
    for line in output.splitlines():
        key, _, value = line.partition(":")
        out[key.strip()] = value.strip()
    return out


def test_lambert_principal():
    r = CliRunner().invoke(root_app, ["lambert", "1"])
    assert r.exit_code == 0, r.output
    fields = _fields(r.stdout)
    assert fields["branch"] == "principal"
    assert fields["w"].startswith("0.5671432904")
    assert abs(float(fields["residual"])) < 1e-14


def test_lambert_lower_branch_negative_argument():
    r = CliRunner().invoke(root_app, ["lambert", "--branch", "lower", "--", "-0.2"])
    assert r.exit_code == 0, r.output
    fields = _fields(r.stdout)
    assert fields["branch"] == "lower"
    assert abs(float(fields["w"]) + 2.5426413577735265) < 1e-12


def test_lambert_exp_argument():
    r = CliRunner().invoke(root_app, ["lambert", "--exp", "1000"])
    assert r.exit_code == 0, r.output
    w = float(_fields(r.stdout)["w"])
    assert abs(w + math.log(w) - 1000.0) < 1e-10


def test_lambert_errors():
    runner = CliRunner()
    assert runner.invoke(root_app, ["lambert"]).exit_code == 2
    assert runner.invoke(root_app, ["lambert", "1", "--exp", "2"]).exit_code == 2
    r = runner.invoke(root_app, ["lambert", "--", "-1"])
    assert r.exit_code == 2
    assert "Error:" in r.output
