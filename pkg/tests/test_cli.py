import csv
import io
import json
import subprocess
import sys

import pytest

from fdrelay import Scenario, SweepSpec, analyse
from fdrelay.cli import EXIT_INDETERMINATE, EXIT_OK, EXIT_USAGE, evaluate_point, main, run_sweep, write_csv
from fdrelay.errors import ConfigurationError
from fdrelay.scenario import load_scenario_file, point_record, scenario_from_mapping


def _json_tail(text):
    return json.loads(text.strip().splitlines()[-1])


def test_analyze_json(capsys):
    assert main(["analyze", "--json", "--set", "n=4", "--set", "g=1e-8"]) == EXIT_OK
    record = _json_tail(capsys.readouterr().out)
    assert record["n"] == 4 and record["g"] == 1e-8
    assert record["stable"] is True
    assert 0 < record["p_empty"] < 1


def test_analyze_table_output(capsys):
    assert main(["analyze", "--set", "mode=two-user", "--set", "q1=0.2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "throughput_user1" in out
    assert _json_tail(out)["q1"] == 0.2


def test_unknown_key_exits_with_usage_error(capsys):
    assert main(["analyze", "--set", "colour=blue"]) == EXIT_USAGE
    assert "colour" in capsys.readouterr().err


def test_bad_value_exits_with_usage_error(capsys):
    assert main(["analyze", "--set", "q=1.5"]) == EXIT_USAGE
    assert main(["analyze", "--set", "n=2.5"]) == EXIT_USAGE
    assert main(["analyze", "--set", "beta=0.5"]) == EXIT_USAGE
    capsys.readouterr()


def test_auto_q0_lands_inside_stability_interval():
    scenario = scenario_from_mapping({"q0": "auto", "n": "6"})
    cfg, qa, _ = analyse(scenario)
    assert qa.stable
    assert cfg.q0 == pytest.approx(0.5 * (qa.q0min + 1))


def test_one_point_sweep_equals_analyze():
    scenario = Scenario(n=5, g=1e-8)
    rows = run_sweep(scenario, SweepSpec("q", 0.3, 0.3, 1))
    assert len(rows) == 1
    row = rows[0]
    assert row.pop("sweep_var") == "q" and row.pop("sweep_value") == 0.3
    assert row == evaluate_point(scenario)
    cfg, qa, th = analyse(scenario)
    assert row == point_record(scenario, cfg, qa, th)


def test_sweep_csv_is_bit_stable(capsys):
    argv = ["sweep", "--sweep-var", "g", "--from", "1e-10", "--to", "1", "--steps", "6", "--log", "--set", "n=3"]
    assert main(argv) == EXIT_OK
    first = capsys.readouterr().out
    assert main(argv) == EXIT_OK
    assert capsys.readouterr().out == first
    rows = list(csv.DictReader(io.StringIO(first)))
    assert len(rows) == 6
    assert float(rows[0]["sweep_value"]) == 1e-10 and float(rows[-1]["sweep_value"]) == 1.0
    # round trip at full precision
    record = evaluate_point(Scenario(n=3, g=float(rows[2]["sweep_value"])))
    assert float(rows[2]["mu"]) == record["mu"]


def test_sweep_stable_flag_matches_rates():
    rows = run_sweep(Scenario(gamma=0.2, g=1e-10), SweepSpec("n", 1, 15, 15))
    for row in rows:
        assert row["stable"] == (row["lambda1"] < row["mu"])
        if not row["stable"]:
            assert row["qbar"] == float("inf") and row["p_empty"] == 0.0
    assert [r["n"] for r in rows] == list(range(1, 16))


def test_curves_and_parallel_jobs_keep_order():
    spec = SweepSpec("n", 2, 6, 5)
    serial = run_sweep(Scenario(), spec, curve=("q", ["0.1", "0.3"]))
    parallel = run_sweep(Scenario(), spec, jobs=2, curve=("q", ["0.1", "0.3"]))
    assert serial == parallel
    assert [(r["curve_value"], r["n"]) for r in serial] == [(c, n) for c in ("0.1", "0.3") for n in range(2, 7)]


def test_n_sweep_must_hit_integers():
    with pytest.raises(ConfigurationError):
        SweepSpec("n", 1, 4, 3).values()


def test_scenario_file_with_sweep(tmp_path, capsys):
    path = tmp_path / "fig.toml"
    path.write_text('gamma = 0.2\ng = 1e-10\nq = 0.3\n\n[sweep]\nvariable = "n"\nfrom = 1\nto = 4\nsteps = 4\n')
    out = tmp_path / "out.csv"
    assert main(["sweep", "--scenario", str(path), "--out", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert [int(r["n"]) for r in rows] == [1, 2, 3, 4]
    assert all(float(r["gamma"]) == 0.2 for r in rows)


def test_scenario_file_unknown_key(tmp_path, capsys):
    path = tmp_path / "bad.toml"
    path.write_text("gamma = 0.2\nrelay_height = 3\n")
    with pytest.raises(ConfigurationError, match="relay_height"):
        load_scenario_file(path)
    assert main(["analyze", "--scenario", str(path)]) == EXIT_USAGE
    assert "relay_height" in capsys.readouterr().err


def test_simulate_subcommand(capsys):
    assert main(["simulate", "--json", "--set", "n=4", "--slots", "50000", "--seed", "3"]) == EXIT_OK
    record = _json_tail(capsys.readouterr().out)
    assert record["sim_slots_run"] == 50000
    assert record["sim_verdict"] in ("stable", "indeterminate", "unstable")


def test_strict_simulate_flags_indeterminate(monkeypatch, capsys):
    from fdrelay import cli
    from fdrelay.simulator import InstabilityVerdict

    real = cli._simulate

    def fake(scenario, cfg):
        report, _ = real(scenario, cfg)
        return report, InstabilityVerdict("indeterminate", 0.0, 1.0, 0, 0.0)

    monkeypatch.setattr(cli, "_simulate", fake)
    argv = ["simulate", "--json", "--slots", "20000"]
    assert main(argv + ["--strict"]) == EXIT_INDETERMINATE
    assert main(argv) == EXIT_OK
    capsys.readouterr()


def test_sweep_with_simulation_adds_columns():
    rows = run_sweep(Scenario(n=3, slots=20_000, seed=1), SweepSpec("q", 0.2, 0.3, 2), simulate=True)
    buf = io.StringIO()
    write_csv(rows, buf)
    header = buf.getvalue().splitlines()[0].split(",")
    assert "sim_empirical_mu" in header and "sim_verdict" in header


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fdrelay", "analyze", "--json"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert _json_tail(proc.stdout)["mode"] == "n-symmetric"
