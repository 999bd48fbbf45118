import subprocess
import sys
from pathlib import Path

import pytest

from delegsim.cli import main, parse_cli
from delegsim.experiment import ALL_POLICIES, ConfigError, ExperimentConfig
from delegsim.policies import PolicyKind


def test_defaults_with_seed(tmp_path):
    cfg = parse_cli(["run", "--algo", "all", "--seed", "42", "--out", str(tmp_path)])
    assert cfg == ExperimentConfig(master_seed=42, output_dir=tmp_path)
    assert (cfg.runs, cfg.trials, cfg.neighbors, cfg.depth) == (100, 1000, 5, 4)
    assert cfg.epsilon_range == (0.05, 0.1) and cfg.delta_range == (0.8, 1.0)
    assert cfg.policies == ALL_POLICIES


def test_algo_repeatable_and_comma_lists(tmp_path):
    cfg = parse_cli(["run", "--algo", "dig,ucb1", "--algo", "did", "--algo", "dig",
                     "--out", str(tmp_path)])
    assert cfg.policies == (PolicyKind.DIG, PolicyKind.UCB1, PolicyKind.DID)


def test_zero_trials_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        parse_cli(["run", "--trials", "0", "--out", "x"])
    assert exc.value.code != 0
    assert "--trials" in capsys.readouterr().err


def test_unknown_flag(capsys):
    assert_exit = pytest.raises(SystemExit)
    with assert_exit as exc:
        main(["run", "--bogus", "1", "--out", "x"])
    assert exc.value.code == 2
    assert "unrecognized" in capsys.readouterr().err


def test_missing_output(capsys):
    assert main(["run", "--trials", "5"]) == 2
    assert "--out" in capsys.readouterr().err


@pytest.mark.parametrize("flags", [["--epsilon-lo", "0.01"], ["--delta-hi", "1.5"],
                                   ["--algo", "thompson"], ["--welch-tol", "-1"]])
def test_out_of_range_values(flags, capsys):
    assert main(["run", "--out", "x", *flags]) == 2
    assert "error" in capsys.readouterr().err


def test_config_file_and_override(tmp_path):
    c = tmp_path / "c.txt"
    c.write_text("# experiment\ntrials=1000\nruns = 3  # few\nalgo=did,dig\n"
                 f"out={tmp_path / 'r'}\ndecoupled=true\n")
    cfg = parse_cli(["run", "--config", str(c), "--trials", "50"])
    assert cfg.trials == 50 and cfg.runs == 3
    assert cfg.policies == (PolicyKind.DID, PolicyKind.DIG)
    assert cfg.output_dir == tmp_path / "r" and not cfg.paired


def test_config_unknown_key(tmp_path):
    c = tmp_path / "c.txt"
    c.write_text("trails=10\n")
    with pytest.raises(ConfigError, match="unknown key 'trails'"):
        parse_cli(["run", "--config", str(c), "--out", "x"])


def test_config_malformed_line(tmp_path):
    c = tmp_path / "c.txt"
    c.write_text("trials 10\n")
    with pytest.raises(ConfigError, match=":1:"):
        parse_cli(["run", "--config", str(c), "--out", "x"])


def test_run_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "r"
    code = main(["run", "--runs", "2", "--trials", "30", "--neighbors", "2",
                 "--depth", "1", "--seed", "3", "--out", str(out)])
    assert code == 0
    names = {p.name for p in out.iterdir()}
    assert {"series.csv", "summary.csv", "seeds.csv", "fig1a.svg", "fig1b.svg"} <= names
    assert "wrote" in capsys.readouterr().out


def test_validate_subcommand(capsys):
    assert main(["validate", "--trials", "2000"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("[PASS]") == 6


def test_oracle_subcommand(capsys):
    assert main(["oracle", "--max-count", "2", "--delta", "0.9"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 1 + 4 + 1
    assert lines[1].split()[:3] == ["1", "1", "0.900"]


def test_console_script_module_entry(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "delegsim.cli", "run", "--trials", "0"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "usage" in proc.stderr
