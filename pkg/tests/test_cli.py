import csv
import json

import pytest

from src.cli import build_parser, main
from src.utils.errors import UsageError


def _config(tmp_path, **overrides):
    data = {"hurst": 0.75, "integrand": {"atoms": [[0.2, 1.0]]}, "scenario": "FbmConvex",
            "n_values": [16, 32, 64, 128], "fine_grid": 128, "replicates": 300,
            "r_norm": 1.0, "p_param": 1.6, "beta_param": 0.3, "seed": 3}
    data.update(overrides)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_simulate_paths_writes_csv(tmp_path):
    out = tmp_path / "paths.csv"
    assert main(["simulate-paths", "--hurst", "0.7", "--steps", "8", "--count", "2", "--seed", "5", "--out", str(out)]) == 0
    raw = out.read_bytes()
    assert b"\r\n" not in raw
    rows = list(csv.DictReader(raw.decode("utf-8").splitlines()))
    assert list(rows[0].keys()) == ["path_id", "i", "t", "value"]
    assert len(rows) == 18
    assert float(rows[0]["value"]) == 0.0


def test_simulate_paths_zero_steps(tmp_path):
    assert main(["simulate-paths", "--hurst", "0.7", "--steps", "0", "--out", str(tmp_path / "p.csv")]) == 1


def test_unknown_flag_rejected(tmp_path):
    assert main(["simulate-paths", "--hurst", "0.7", "--steps", "8", "--bogus", "--out", str(tmp_path / "p.csv")]) == 1
    with pytest.raises(UsageError):
        build_parser().parse_args(["no-such-command"])


def test_global_flags_before_and_after_subcommand():
    before = build_parser().parse_args(["--seed", "4", "--threads", "2", "besov", "--input", "x.csv", "--beta", "0.4"])
    after = build_parser().parse_args(["besov", "--input", "x.csv", "--beta", "0.4", "--seed", "4", "--threads", "2"])
    assert (before.seed, before.threads) == (after.seed, after.threads) == (4, 2)


def test_estimate_rate_range_violation(tmp_path, capsys):
    cfg = _config(tmp_path, p_param=1.4)
    assert main(["estimate-rate", "--config", str(cfg), "--out", str(tmp_path / "r.json")]) == 1
    assert "2H < p < H/(1-H)" in capsys.readouterr().err


def test_estimate_rate_insufficient_replicates(tmp_path):
    cfg = _config(tmp_path, replicates=1)
    assert main(["estimate-rate", "--config", str(cfg), "--out", str(tmp_path / "r.json"), "--no-register"]) == 2


def test_estimate_rate_quiet_and_threads_do_not_change_results(tmp_path, capsys):
    cfg = _config(tmp_path)
    loud, quiet = tmp_path / "loud.json", tmp_path / "quiet.json"
    assert main(["--threads", "1", "estimate-rate", "--config", str(cfg), "--out", str(loud)]) == 0
    assert main(["--quiet", "--threads", "3", "estimate-rate", "--config", str(cfg), "--out", str(quiet)]) == 0
    strip = lambda path: [line for line in path.read_text(encoding="utf-8").splitlines() if "created_at" not in line]
    assert strip(loud) == strip(quiet)
    captured = capsys.readouterr()
    assert "resolved configuration" in captured.err
    assert "slope=" in captured.out
    assert (tmp_path / "loud.loglog.dat").exists()


def test_estimate_rate_missing_directory(tmp_path):
    cfg = _config(tmp_path)
    assert main(["estimate-rate", "--config", str(cfg), "--out", str(tmp_path / "missing" / "r.json")]) == 1


def test_crossing_bound_writes_sweep(tmp_path, capsys):
    out, xlsx = tmp_path / "sweep.csv", tmp_path / "sweep.xlsx"
    code = main(["crossing-bound", "--hurst", "0.75", "--s-grid", "0.2", "0.5", "--t-grid", "0.6", "1.0",
                 "--a-grid", "0", "0.5", "--out", str(out), "--xlsx", str(xlsx)])
    assert code == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "s,t,a,probability,bound,ratio"
    assert len(lines) == 1 + 8
    assert xlsx.exists()
    assert "max_ratio=" in capsys.readouterr().out


def test_besov_from_simulated_csv(tmp_path, capsys):
    paths = tmp_path / "paths.csv"
    assert main(["simulate-paths", "--hurst", "0.8", "--steps", "64", "--out", str(paths)]) == 0
    capsys.readouterr()
    assert main(["besov", "--input", str(paths), "--beta", "0.3"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert list(report) == sorted(report)
    assert report["beta"] == 0.3 and report["n_points"] == 65


def test_verify_ito_prints_table(tmp_path, capsys):
    integrand = tmp_path / "f.json"
    integrand.write_text(json.dumps({"atoms": [[0.2, 1.0]]}), encoding="utf-8")
    assert main(["verify-ito", "--hurst", "0.75", "--steps", "64", "--paths", "50", "--integrand", str(integrand)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n\tl1_error"
    assert [int(line.split("\t")[0]) for line in lines[1:]] == [2, 4, 8, 16, 32, 64]
    assert main(["verify-ito", "--hurst", "0.3", "--steps", "64", "--paths", "5", "--integrand", str(integrand)]) == 1


def test_list_runs_after_estimate(tmp_path, capsys):
    cfg = _config(tmp_path, seed=99)
    assert main(["estimate-rate", "--config", str(cfg), "--out", str(tmp_path / "r.json")]) == 0
    capsys.readouterr()
    assert main(["list-runs", "--scenario", "FbmConvex"]) == 0
    out = capsys.readouterr().out
    assert "FbmConvex" in out and "seed=99" in out
