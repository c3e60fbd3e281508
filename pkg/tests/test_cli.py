import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

import merawave.cli as cli
from merawave.errors import SingularMatrix
from merawave.io import read_stacks, write_series
from merawave.lrd import fgn_generate
from merawave.training import TrainingConfig
from merawave.transform import haar_stack

COMMANDS = ["train", "compress", "sweep", "hurst", "filters", "synth"]


@pytest.fixture(scope="module")
def series(tmp_path_factory):
    p = tmp_path_factory.mktemp("data") / "fgn.csv"
    write_series(p, fgn_generate(4096, 0.8, 7))
    return p


@pytest.fixture(scope="module")
def trained(series, tmp_path_factory):
    out = tmp_path_factory.mktemp("run1")
    assert cli.main(["train", "--input", str(series), "--out", str(out), "--set", "seed=12345",
                     "--set", "iterations=20"]) == 0
    return out


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_train_outputs(trained):
    assert (trained / "stack.json").exists() and (trained / "loss.csv").exists()
    loss = rows(trained / "loss.csv")
    assert list(loss[0]) == ["window", "iteration", "sparsity", "mse", "total"]
    assert len(loss) == 4 * 20
    cfg, stacks = read_stacks(trained / "stack.json")
    assert (cfg.stage1, cfg.stage2) == (10, 10)
    assert [w for w, _ in stacks] == [[0], [1], [2], [3]]


def test_default_config_echo(series, tmp_path):
    assert cli.main(["train", "--input", str(series), "--out", str(tmp_path), "--set", "stage1=1",
                     "--set", "stage2=0", "--window-size", "4096"]) == 0
    echo = json.loads((tmp_path / "stack.json").read_text())["config"]
    assert echo == {**TrainingConfig().to_dict(), "stage1": 1, "stage2": 0}


def test_zero_iterations_writes_haar(series, tmp_path):
    assert cli.main(["train", "--input", str(series), "--out", str(tmp_path), "--set", "iterations=0"]) == 0
    _, stacks = read_stacks(tmp_path / "stack.json")
    assert all(np.array_equal(s, haar_stack(5)) for _, s in stacks)


def test_multi_window_training(series, tmp_path):
    assert cli.main(["train", "--input", str(series), "--out", str(tmp_path), "--multi-window",
                     "--set", "iterations=4"]) == 0
    _, stacks = read_stacks(tmp_path / "stack.json")
    assert len(stacks) == 1 and stacks[0][0] == [0, 1, 2, 3]
    assert {r["window"] for r in rows(tmp_path / "loss.csv")} == {"all"}


def test_config_file_is_used(series, tmp_path):
    (tmp_path / "cfg.json").write_text(json.dumps({"levels": 3, "stage1": 1, "stage2": 1}))
    assert cli.main(["train", "--input", str(series), "--out", str(tmp_path / "o"),
                     "--config", str(tmp_path / "cfg.json")]) == 0
    cfg, stacks = read_stacks(tmp_path / "o" / "stack.json")
    assert cfg.levels == 3 and stacks[0][1].shape == (3, 2, 2)


def test_sweep_shape_and_columns(series, trained, tmp_path):
    assert cli.main(["sweep", "--input", str(series), "--stack", str(trained / "stack.json"),
                     "--rhos", "0.1,0.2,0.4,0.8", "--out", str(tmp_path)]) == 0
    table = rows(tmp_path / "sweep.csv")
    assert list(table[0]) == ["trace", "transform", "rho", "kept", "psnr_db",
                              "delta_psnr_vs_haar", "delta_psnr_vs_db4", "delta_h"]
    for t in ("learned", "haar", "db4"):
        assert len([r for r in table if r["transform"] == t]) == 4
    learned = [r for r in table if r["transform"] == "learned"]
    assert all(math.isfinite(float(r["delta_psnr_vs_haar"])) for r in learned)
    assert all(math.isfinite(float(r["delta_h"])) for r in learned)


def test_sweep_baseline_only_multiple_traces(series, tmp_path):
    other = tmp_path / "other.csv"
    write_series(other, fgn_generate(2048, 0.6, 1))
    assert cli.main(["sweep", "--input", str(series), str(other), "--rhos", "0.5,1",
                     "--no-delta-h", "--out", str(tmp_path / "o")]) == 0
    table = rows(tmp_path / "o" / "sweep.csv")
    assert len(table) == 2 * 2 * 2 and "delta_h" not in table[0]
    assert {r["trace"] for r in table} == {"fgn", "other"}
    assert all(r["psnr_db"] == "inf" for r in table if r["rho"] == "1.0")


@pytest.mark.parametrize("rhos", ["0", "1.5", "-0.1", "0.1,abc"])
def test_sweep_rejects_bad_rho(series, tmp_path, rhos, capsys):
    assert cli.main(["sweep", "--input", str(series), "--rhos", rhos, "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err.strip()
    assert err.startswith("merawave sweep: error:") and "\n" not in err


def test_compress(series, trained, tmp_path):
    assert cli.main(["compress", "--input", str(series), "--stack", str(trained / "stack.json"),
                     "--rho", "0.1", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "compress.json").read_text())
    assert summary["kept_per_window"] == 103 and summary["windows"] == 4
    recon = np.loadtxt(tmp_path / "reconstructed.csv")
    assert recon.shape == (4096,)
    assert cli.main(["compress", "--input", str(series), "--transform", "db4", "--rho", "1",
                     "--out", str(tmp_path / "b")]) == 0
    assert np.array_equal(np.loadtxt(tmp_path / "b" / "reconstructed.csv"), np.loadtxt(series))


def test_hurst(series, tmp_path):
    assert cli.main(["hurst", "--input", str(series), "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "hurst.json").read_text())
    assert set(summary) >= {"h", "ci", "beta", "j1", "j2"}
    assert summary["ci"][0] <= summary["h"] <= summary["ci"][1]
    assert summary["beta"] == 2 - 2 * summary["h"]
    spec = rows(tmp_path / "spectrum.csv")
    assert list(spec[0]) == ["j", "y_j", "n_j", "weight"]
    assert [int(r["n_j"]) for r in spec] == [4096 >> j for j in range(1, summary["j2"] + 1)]


def test_filters(trained, tmp_path):
    assert cli.main(["filters", "--stack", str(trained / "stack.json"), "--grid", "16", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "filters.json").read_text())
    assert len(doc) == 4 and len(doc[0]["levels"]) == 5
    assert set(doc[0]["levels"][0]) == {"level", "g", "h", "det", "qmf"}
    assert len(rows(tmp_path / "frequency_response.csv")) == 4 * 5 * 16
    assert cli.main(["filters", "--set", "levels=2", "--out", str(tmp_path / "h")]) == 0
    doc = json.loads((tmp_path / "h" / "filters.json").read_text())
    assert all(lev["qmf"] for lev in doc[0]["levels"])


def test_synth(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert cli.main(["synth", "--n", "65536", "--hurst", "0.8", "--seed", "7"]) == 0
    first = (tmp_path / "fgn_n65536_h0.8_s7.csv").read_bytes()
    assert len(first.splitlines()) == 65536
    assert cli.main(["synth", "--n", "65536", "--hurst", "0.8", "--seed", "7", "--out", "again.csv"]) == 0
    assert (tmp_path / "again.csv").read_bytes() == first
    assert cli.main(["synth", "--n", "64", "--hurst", "1.2"]) == 2
    assert cli.main(["synth", "--n", "5000", "--hurst", "0.5"]) == 2


def test_outputs_are_byte_reproducible(series, trained, tmp_path):
    for run in ("a", "b"):
        base = tmp_path / run
        assert cli.main(["train", "--input", str(series), "--out", str(base / "t"), "--set", "iterations=5"]) == 0
        assert cli.main(["sweep", "--input", str(series), "--stack", str(base / "t" / "stack.json"),
                         "--rhos", "0.1,0.5", "--out", str(base / "s")]) == 0
        assert cli.main(["hurst", "--input", str(series), "--out", str(base / "h")]) == 0
        assert cli.main(["filters", "--stack", str(base / "t" / "stack.json"), "--out", str(base / "f")]) == 0
        assert cli.main(["compress", "--input", str(series), "--rho", "0.2", "--out", str(base / "c")]) == 0
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert len(files) == 9
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes(), f


def test_exit_codes(series, tmp_path, monkeypatch, capsys):
    out = str(tmp_path)
    assert cli.main(["train", "--input", str(tmp_path / "missing.csv"), "--out", out]) == 3
    assert cli.main(["train", "--input", str(series), "--out", out, "--set", "lr1=-1"]) == 2
    assert cli.main(["train", "--input", str(series), "--out", out, "--set", "bogus"]) == 2
    assert cli.main(["train", "--input", str(series), "--out", out, "--config", "nope.json"]) == 2
    assert cli.main(["train", "--input", str(series), "--out", out, "--strict-traffic"]) == 3
    assert cli.main(["train", "--input", str(series), "--out", out, "--window-size", "1000"]) == 2
    assert cli.main(["hurst", "--input", str(series), "--out", out, "--j2", "12"]) == 3

    def boom(*a, **k):
        raise SingularMatrix("Adam step produced a rank-deficient matrix", iteration=3, level=2)

    monkeypatch.setattr(cli, "train_windows", boom)
    capsys.readouterr()
    assert cli.main(["train", "--input", str(series), "--out", out]) == 4
    err = capsys.readouterr().err
    assert err.count("\n") == 1 and "iteration=3" in err and "level=2" in err


def test_missing_input_fails_before_any_output(tmp_path):
    out = tmp_path / "never"
    assert cli.main(["train", "--input", str(tmp_path / "missing.csv"), "--out", str(out)]) == 3
    assert not out.exists()


@pytest.mark.parametrize("command", COMMANDS)
def test_help_lists_every_config_key(command, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main([command, "--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for key in list(TrainingConfig().to_dict()) + ["iterations"]:
        assert key in text, (command, key)


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "merawave.cli", "synth", "--n", "16", "--hurst", "0.5",
                          "--out", str(tmp_path / "x.csv")], capture_output=True, text=True)
    assert res.returncode == 0 and len((tmp_path / "x.csv").read_text().splitlines()) == 16
