"""CLI: artifacts, determinism, config handling, and error paths."""

import os
import subprocess
import sys

import pytest

from cvrisk import cli


def run_cli(argv, tmp):
    return cli.main(argv + ["--out", str(tmp)])


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


def csv_rows(path):
    text = read(path).decode().splitlines()
    assert text[0].startswith("# cvrisk")
    header = text[1].split(",")
    return [dict(zip(header, line.split(","))) for line in text[2:]]


def test_majority_minimizer_argmin_row(tmp_path):
    assert run_cli(["majority-minimizer", "--n", "300"], tmp_path) == 0
    rows = csv_rows(tmp_path / "majority-minimizer-n300.csv")
    argmin = [r for r in rows if r["is_argmin"] == "true"]
    assert len(argmin) == 1 and argmin[0]["m"] == "100"


def test_decompose_anticorr_row(tmp_path):
    assert run_cli(["decompose", "--rule", "anticorr", "--n", "2", "--k", "2"], tmp_path) == 0
    rows = csv_rows(tmp_path / "decompose-anticorr-n2.csv")
    assert rows[0]["mse"] == "0/1"
    assert rows[0]["sls_float"] == "0.125"
    assert rows[0]["residual"] == "0/1"


def test_rerun_byte_identical(tmp_path):
    argv = ["decompose", "--rule", "majority", "--n", "4", "--format", "both"]
    run_cli(argv, tmp_path)
    first = {
        p: read(tmp_path / p) for p in os.listdir(tmp_path)
    }
    run_cli(argv, tmp_path)
    second = {p: read(tmp_path / p) for p in os.listdir(tmp_path)}
    assert first == second


def test_thread_env_does_not_change_artifacts(tmp_path):
    argv = [
        sys.executable, "-m", "cvrisk.cli", "linear-mse",
        "--n", "4", "--k", "2", "--d", "3", "--q", "3",
        "--trials", "2000", "--seed", "9", "--out", str(tmp_path),
    ]
    env1 = dict(os.environ, CVRISK_THREADS="1")
    env2 = dict(os.environ, CVRISK_THREADS="8")
    subprocess.run(argv, check=True, env=env1)
    blob1 = read(tmp_path / "linear-mse.csv")
    subprocess.run(argv, check=True, env=env2)
    blob2 = read(tmp_path / "linear-mse.csv")
    assert blob1 == blob2


def test_minimax_sweep_consistency(tmp_path):
    assert run_cli(["minimax-sweep", "--n", "120"], tmp_path) == 0
    rows = csv_rows(tmp_path / "minimax-sweep-n120.csv")
    floats = [float(r["max_mse_float"]) for r in rows]
    proxy = float(rows[0]["minimax_proxy_float"])
    assert proxy == pytest.approx(min(floats))
    assert sum(r["is_argmin"] == "true" for r in rows) >= 1


def test_minimax_sweep_argmins_at_large_n(tmp_path):
    # the covariance argmin is k=3 at large n; the MSE argmin is k=2 because
    # of the (k-1)/k weight in mse = ((k-1)/k) Cov + 1/(4n)
    assert run_cli(["minimax-sweep", "--n", "300"], tmp_path) == 0
    rows = csv_rows(tmp_path / "minimax-sweep-n300.csv")
    assert [r["k"] for r in rows if r["is_cov_argmin"] == "true"] == ["3"]
    assert [r["k"] for r in rows if r["is_argmin"] == "true"] == ["2"]


def test_decompose_mc_mode_with_figure(tmp_path):
    rc = run_cli([
        "decompose", "--rule", "majority", "--n", "4", "--k", "2",
        "--mode", "mc", "--trials", "2000", "--seed", "3", "--format", "both",
    ], tmp_path)
    assert rc == 0
    rows = csv_rows(tmp_path / "decompose-majority-n4.csv")
    assert rows[0]["mode"] == "mc"
    assert float(rows[0]["mse_float"]) == pytest.approx(3 / 32, abs=0.02)


def test_config_file_defaults(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n=12\nformat=csv\n")
    assert cli.main(["majority-table", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "majority-table-n12.csv").exists()


def test_invalid_config_is_an_error(tmp_path):
    assert cli.main(["majority-table", "--n", "nonsense", "--out", str(tmp_path)]) == 2


def test_budget_exhaustion_exit_code(tmp_path):
    rc = cli.main([
        "decompose", "--rule", "majority", "--n", "8", "--k", "2",
        "--budget", "10", "--out", str(tmp_path),
    ])
    assert rc == 2


def test_verify_unknown_suite(tmp_path, capsys):
    rc = cli.main(["verify", "--suite", "no-such-module"])
    assert rc == 2
    assert "unknown suite" in capsys.readouterr().err


def test_verify_single_fast_suite(capsys):
    rc = cli.main(["verify", "--suite", "squarewave", "--fast"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "PASS squarewave.constants" in out


def test_svg_written_alongside_csv(tmp_path):
    run_cli(["squarewave-cov", "--m", "9,16", "--R", "1", "--format", "both"], tmp_path)
    assert (tmp_path / "squarewave-cov.csv").exists()
    svg = read(tmp_path / "squarewave-cov.svg")
    assert svg.startswith(b"<?xml")
