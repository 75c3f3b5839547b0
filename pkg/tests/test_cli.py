import json
import math
from pathlib import Path

import pytest

from prodtail import cli

SPECS = Path(__file__).resolve().parents[1] / "specs"
EXP = str(SPECS / "exponential.json")
PARETO = str(SPECS / "power_law_2.json")
LATTICE = str(SPECS / "lattice_plateau.json")


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path))
    return tmp_path


def _doc(path):
    d = json.loads(path.read_text())
    assert set(d) == {"metadata", "result"}
    assert {"version", "command", "config", "wall_time"} <= set(d["metadata"])
    return d["result"]


def test_dist_reports_validation_and_atoms(out):
    assert cli.main(["dist", LATTICE, "--atoms", "3"]) == cli.EXIT_OK
    res = _doc(out / "dist.json")
    assert res["validation"]["ok"]
    assert [a[0] for a in res["atoms"]] == [3.0, 5.0, 7.0]


def test_tail_writes_csv(out, capsys):
    assert cli.main(["tail", EXP, "--x", "1", "2"]) == cli.EXIT_OK
    lines = (out / "tail-tail.csv").read_text().splitlines()
    assert lines[0] == "x,tail_log"
    assert float(lines[2].split(",")[1]) == -2.0
    assert "x,tail_log" in capsys.readouterr().out


def test_conv_brackets(out):
    assert cli.main(["conv", EXP, EXP, "--x", "1", "--tol", "1e-5"]) == cli.EXIT_OK
    row = (out / "conv-conv.csv").read_text().splitlines()[1].split(",")
    lo, hi = float(row[1]), float(row[2])
    assert lo <= math.log(0.279731) + 1e-5 and math.log(0.27973) - 1e-5 <= hi


def test_indicator_and_classify(out):
    assert cli.main(["indicator", EXP, "--points", "60"]) == cli.EXIT_OK
    res = _doc(out / "indicator.json")
    assert math.isclose(res["zero_shift"]["c_star_0"], 1.0, abs_tol=1e-6)
    assert (out / "indicator-t0.5.csv").read_text().startswith("x,ratio")
    assert cli.main(["classify", PARETO, "--points", "100"]) == cli.EXIT_OK
    rep = _doc(out / "classify.json")
    assert rep["verdicts"]["D"]["verdict"] == "evidence-for"
    assert rep["caveat"]


def test_scenario_exit_code_follows_verdict(out):
    assert cli.main(["scenario", "sin-modulated"]) == cli.EXIT_OK
    assert (out / "scenario-sin-modulated.json").exists()


def test_scenario_params_file(out, tmp_path):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"a": 2.9, "hazard_bound": 0.5}))
    assert cli.main(["scenario", "sin-modulated", "--params", str(p)]) == cli.EXIT_INCONCLUSIVE


def test_oracles(out):
    assert cli.main(["oracle", "expexp", "--x", "1"]) == cli.EXIT_OK
    v = float((out / "oracle-expexp-values.csv").read_text().splitlines()[1].split(",")[1])
    assert math.isclose(math.exp(v), 0.27973, abs_tol=5e-6)
    assert cli.main(["oracle", "grid", EXP, EXP, "--x", "1", "--cells", "2000"]) == cli.EXIT_OK
    assert cli.main(["oracle", "mc", EXP, EXP, "--x", "1", "--n", "2000", "--seed", "3"]) == cli.EXIT_OK
    assert cli.main(["oracle", "sumconv2", EXP, "--x", "2", "--cells", "2000"]) == cli.EXIT_OK
    assert cli.main(["oracle", "mc", EXP, "--x", "1"]) == cli.EXIT_USAGE


def test_out_flag_and_format(tmp_path):
    target = tmp_path / "elsewhere"
    assert cli.main(["tail", EXP, "--x", "1", "--out", str(target), "--format", "json"]) == cli.EXIT_OK
    assert (target / "tail.json").exists()
    assert not (target / "tail-tail.csv").exists()


def test_bad_inputs_exit_with_usage(out, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"family": "power_law", "params": {"beta": "x"}}')
    assert cli.main(["dist", str(bad)]) == cli.EXIT_USAGE
    assert "$.params.beta" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == cli.EXIT_USAGE
