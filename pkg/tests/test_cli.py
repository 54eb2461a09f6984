import json
import subprocess
import sys

import pytest

from prototree.cli import main, parse_config_file


def run_cli(args):
    return main(list(args))


def test_list_shows_registry(capsys):
    assert run_cli(["list"]) == 0
    out = capsys.readouterr().out
    for name in ("nguyen4", "nguyen7", "pagie1", "keijzer6", "korns12", "vladislavleva4"):
        assert name in out
    assert "U[-1,1,20]" in out
    assert "E[1,50,1]" in out


def test_run_writes_trace_and_summary(tmp_path, capsys):
    code = run_cli(
        [
            "run",
            "--problem", "nguyen7",
            "--iterations", "50",
            "--seed", "3",
            "--max-depth", "6",
            "--out-dir", str(tmp_path),
            "--trace-out", "trace.csv",
            "--summary-out", "summary.json",
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "nguyen7 seed=3" in out
    assert "best expression:" in out
    trace = (tmp_path / "trace.csv").read_text().splitlines()
    assert trace[0] == "iteration,best_mse"
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["problem"] == "nguyen7"
    assert summary["iterations"] == 50
    assert "wall_time" not in summary


def test_unknown_problem_fails_with_diagnostic(capsys):
    assert run_cli(["run", "--problem", "nope", "--iterations", "5"]) == 1
    err = capsys.readouterr().err
    assert "error:" in err and "nope" in err


def test_missing_problem_fails(capsys):
    assert run_cli(["run", "--iterations", "5"]) == 1
    assert "no problem" in capsys.readouterr().err


def test_config_file_defaults_and_cli_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# settings\n"
        "problem = nguyen7\n"
        "iterations = 40\n"
        "max_depth = 6\n"
        "seed = 2\n"
    )
    assert run_cli(["run", "--config", str(cfg), "--out-dir", str(tmp_path), "--summary-out", "a.json"]) == 0
    capsys.readouterr()
    a = json.loads((tmp_path / "a.json").read_text())
    assert a["iterations"] == 40 and a["seed"] == 2

    assert run_cli(
        ["run", "--config", str(cfg), "--iterations", "10", "--out-dir", str(tmp_path), "--summary-out", "b.json"]
    ) == 0
    b = json.loads((tmp_path / "b.json").read_text())
    assert b["iterations"] == 10  # explicit flag wins over the file


def test_config_file_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("iterations forty\n")
    assert run_cli(["run", "--config", str(bad), "--problem", "nguyen7"]) == 1
    assert "expected 'key = value'" in capsys.readouterr().err

    bad.write_text("wibble = 3\n")
    assert run_cli(["run", "--config", str(bad), "--problem", "nguyen7"]) == 1
    assert "unknown config key" in capsys.readouterr().err

    bad.write_text("iterations = soon\n")
    with pytest.raises(ValueError, match="bad value"):
        parse_config_file(bad)


def test_env_var_out_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("PROTOTREE_OUT_DIR", str(tmp_path / "outputs"))
    assert run_cli(["run", "--problem", "nguyen7", "--max-depth", "6", "--iterations", "3", "--trace-out", "t.csv"]) == 0
    assert (tmp_path / "outputs" / "t.csv").exists()


def test_baseline_subcommand(tmp_path, capsys):
    code = run_cli(
        ["baseline", "--problem", "nguyen7", "--iterations", "30", "--seed", "1", "--max-depth", "6",
         "--out-dir", str(tmp_path), "--summary-out", "base.json"]
    )
    assert code == 0
    data = json.loads((tmp_path / "base.json").read_text())
    assert data["algorithm"] == "random"
    assert data["node_count"] == 0


def test_bench_prints_table_and_writes_artifacts(tmp_path, capsys):
    code = run_cli(
        [
            "bench",
            "--problems", "nguyen7",
            "--runs", "2",
            "--iterations", "30",
            "--max-depth", "6",
            "--seed", "1",
            "--out-dir", str(tmp_path),
            "--artifacts",
            "--table-out", "table.txt",
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "nguyen7" in out and "train median" in out
    summary = json.loads((tmp_path / "nguyen7.summary.json").read_text())
    assert len(summary["runs"]) == 2
    assert (tmp_path / "nguyen7.histogram.csv").read_text().startswith("set,bin_low")
    assert (tmp_path / "table.txt").read_text() == out[out.index("problem"):]


def test_bench_rejects_unknown_problem_before_running(capsys):
    assert run_cli(["bench", "--problems", "nguyen7,bogus", "--runs", "1", "--iterations", "5"]) == 1
    assert "bogus" in capsys.readouterr().err


def test_bench_needs_problems(capsys):
    assert run_cli(["bench", "--runs", "1"]) == 1
    assert "no problems" in capsys.readouterr().err


def test_train_csv_export(tmp_path, capsys):
    code = run_cli(
        ["run", "--problem", "keijzer6", "--iterations", "3", "--max-depth", "5",
         "--out-dir", str(tmp_path), "--train-csv", "train.csv", "--test-csv", "test.csv"]
    )
    assert code == 0
    train = (tmp_path / "train.csv").read_text().splitlines()
    assert train[0] == "x,target"
    assert len(train) == 51
    assert len((tmp_path / "test.csv").read_text().splitlines()) == 121


def test_test_csv_without_test_set_fails(tmp_path, capsys):
    code = run_cli(
        ["run", "--problem", "nguyen7", "--iterations", "3", "--out-dir", str(tmp_path), "--test-csv", "t.csv"]
    )
    assert code == 1
    assert "no test set" in capsys.readouterr().err


def test_module_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "prototree", "list"], capture_output=True, text=True, timeout=120
    )
    assert proc.returncode == 0
    assert "nguyen4" in proc.stdout


def test_include_timing_flag(tmp_path, capsys):
    code = run_cli(
        ["run", "--problem", "nguyen7", "--iterations", "5", "--max-depth", "6",
         "--out-dir", str(tmp_path), "--summary-out", "s.json", "--include-timing"]
    )
    assert code == 0
    assert "wall_time" in json.loads((tmp_path / "s.json").read_text())
