import csv
import io
import json
import subprocess
import sys

import pytest

from pulse_seek import cli, core, simulator


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_plan_multi_target(capsys):
    code, out, _ = run(capsys, "plan", "--family", "multi-target", "--n", "5", "--epsilon", "1e-2")
    d = json.loads(out)
    assert code == 0 and d["m"] == 3
    assert d["mean_time"] == pytest.approx(7.55, abs=0.005)


def test_plan_multi_receiver(capsys):
    code, out, _ = run(capsys, "plan", "--family", "multi-receiver", "--n", "1", "--epsilon", "0.25", "--L", "1")
    plan = json.loads(out)["plan"]
    assert code == 0 and plan["M"] == 1 and plan["mean_time"] == 4.0


def test_plan_single_uniform(capsys):
    code, out, _ = run(capsys, "plan", "--family", "single", "--epsilon", "0.01")
    d = json.loads(out)
    assert code == 0 and d["ladder"]["m"] == 5
    assert d["comparison"]["dichotomy_loss"] == pytest.approx(0.0614757, abs=1e-7)


def test_plan_single_with_prior(capsys, tmp_path):
    prior = tmp_path / "prior.json"
    prior.write_text(core.dumps(core.PriorDensity.piecewise([0, 0.5, 1], [1.6, 0.4])))
    code, out, _ = run(capsys, "plan", "--family", "single", "--epsilon", "0.3", "--prior-file", str(prior))
    d = json.loads(out)
    assert code == 0
    assert d["load_profile"]["phi"][0] > d["load_profile"]["phi"][1]
    assert d["trichotomy"]["depth"] == 2


def test_plan_bad_epsilon_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["plan", "--family", "single", "--epsilon", "2", "--L", "1"])
    assert exc.value.code == 2
    err = capsys.readouterr().err
    assert "--epsilon" in err and "EpsilonOutOfRange" in err


def test_planner_error_exits_1(capsys, tmp_path):
    prior = tmp_path / "prior.json"
    prior.write_text(json.dumps({"kind": "piecewise_constant", "breakpoints": [0, 0.5, 1], "values": [1, -1]}))
    code, out, err = run(capsys, "plan", "--family", "single", "--epsilon", "0.3", "--prior-file", str(prior))
    assert code == 1 and out == "" and "NegativeDensity" in err


def _scenario_file(tmp_path, **kw):
    sc = simulator.Scenario(core.SourceModel.uniform(), core.ApertureLadder((1.0, 0.3, 0.1)), **kw)
    path = tmp_path / "scenario.json"
    path.write_text(core.dumps(sc))
    return path


def test_simulate_deterministic(capsys, tmp_path):
    path = _scenario_file(tmp_path)
    args = ("simulate", "--scenario-file", str(path), "--trials", "3000", "--seed", "42")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b
    assert json.loads(a)["trials"] == 3000


def test_simulate_modes_agree(capsys, tmp_path):
    path = _scenario_file(tmp_path)
    base = ("simulate", "--scenario-file", str(path), "--trials", "10000", "--seed", "42")
    a = json.loads(run(capsys, *base, "--mode", "thinning")[1])
    b = json.loads(run(capsys, *base, "--mode", "literal", "--dwell", "1e-4")[1])
    assert abs(a["mean"] - b["mean"]) <= 3 * (a["stderr"] ** 2 + b["stderr"] ** 2) ** 0.5


def test_simulate_traces(capsys, tmp_path):
    path = _scenario_file(tmp_path, trials=5)
    traces = tmp_path / "t.csv"
    code, out, _ = run(capsys, "simulate", "--scenario-file", str(path), "--traces", str(traces))
    assert code == 0 and json.loads(out)["trials"] == 5
    assert traces.read_text().startswith("trial,time")


def test_simulate_missing_file_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        cli.main(["simulate", "--scenario-file", str(tmp_path / "nope.json")])
    assert exc.value.code == 2


def test_simulate_error_exits_1(capsys, tmp_path):
    sc = core.dumps({"model": core.SourceModel.uniform(), "plan": {"kind": "ladder", "widths": [1.0, 0.1]},
                     "epsilon": 0.05})
    path = tmp_path / "s.json"
    path.write_text(sc)
    code, _, err = run(capsys, "simulate", "--scenario-file", str(path))
    assert code == 1 and "PlanExhausted" in err


def test_table1(capsys):
    code, out, err = run(capsys, "table", "--which", "table1")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["eps_over_L", "n", "m", *[f"l{i}" for i in range(1, 10)], "lambda_tau"]
    assert len(rows) == 25 and code == 0
    cell = next(r for r in rows[1:] if r[0] == "0.01" and r[1] == "5")
    assert cell[2] == "3" and cell[-1] == "7.5497"
    assert "inferred" in err


def test_table5_single_row(capsys):
    code, out, _ = run(capsys, "table", "--which", "table5", "--eps", "0.25")
    assert out.splitlines() == ["eps_over_L,n,M,W1,lambda_tau", "0.25,1,1,0.25,4"]


def test_table4_header(capsys):
    _, out, _ = run(capsys, "table", "--which", "table4", "--n", "2", "--eps", "0.5,0.1,0.02")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["eps_over_L", "n", "M", "W1", "W2", "W3", "lambda_tau"]
    assert rows[1] == ["0.5", "2", "1", "1", "", "", "1"]
    assert rows[3] == ["0.02", "2", "3", "0.814325", "0.221042", "0.06", "3.68403"]


def test_table_unknown_exits_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["table", "--which", "table9"])
    assert exc.value.code == 2


@pytest.mark.parametrize("suite", ["boundaries", "composition"])
def test_verify_suites(capsys, suite):
    code, out, _ = run(capsys, "verify", "--suite", suite)
    report = json.loads(out)
    assert code == 0 and report["passed"] and report["failed"] == []
    assert all({"observed", "expected", "tolerance"} <= c.keys() for c in report["checks"])


def test_verify_prob24_small(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "prob24", "--trials", "100000", "--seed", "7")
    report = json.loads(out)
    assert code == (0 if report["passed"] else 1)
    assert len(report["checks"]) == 108


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "pulse_seek", "table", "--which", "table5", "--eps", "0.09"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[1] == "0.09,1,2,0.3,0.09,6.66667"
