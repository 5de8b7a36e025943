import glob
import json
import os

import numpy as np
import pytest

from qlab import cli

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")


def run_cli(args, capsys=None):
    return cli.main(args)


def test_list_contains_all_experiments(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    for name in ("strichartz", "kato", "parametrix", "wave-speed"):
        assert name in out


def test_unknown_experiment_lists_valid_names(capsys):
    assert cli.main(["no-such-thing"]) == 1
    err = capsys.readouterr().err
    assert "strichartz" in err and "unknown experiment" in err


def test_unknown_key_rejected(capsys):
    assert cli.main(["spectrum", "--frobnicate", "3"]) == 1
    assert "unknown key" in capsys.readouterr().err


def test_spectrum_run_exact_eigenvalues(tmp_path):
    rc = cli.main(["spectrum", "--out", str(tmp_path), "--n", "2", "--K", "8"])
    assert rc == 0
    rows = np.loadtxt(tmp_path / "spectrum.csv", delimiter=",", skiprows=1)
    ks = rows[:, 0]
    assert np.allclose(rows[:, 1], ks * (ks + 1), atol=1e-10)
    payload = json.loads((tmp_path / "spectrum.json").read_text())
    assert payload["config"]["K"] == 8
    assert "version" in payload and "runtime_seconds" in payload


def test_validate_shipped_configs(capsys):
    configs = sorted(glob.glob(os.path.join(CONFIG_DIR, "*.ini")))
    assert len(configs) == 15
    for path in configs:
        rc = cli.main(["validate", "--config", path])
        out = capsys.readouterr()
        assert rc == 0, f"{path}: {out.out or out.err}"
        assert out.out.strip() == "ok"


def test_validate_truncation_too_small(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[experiment]\nexperiment = projector-norms\nK = 0\n")
    rc = cli.main(["validate", "--config", str(cfg)])
    out = capsys.readouterr().out
    assert rc == 1
    assert "truncation too small" in out


def test_validate_never_writes_outputs(tmp_path):
    cfg = tmp_path / "ok.ini"
    cfg.write_text("[experiment]\nexperiment = spectrum\nK = 4\n")
    rc = cli.main(["validate", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 0
    assert not (tmp_path / "spectrum.csv").exists()


def test_config_experiment_mismatch(tmp_path, capsys):
    cfg = tmp_path / "mismatch.ini"
    cfg.write_text("[experiment]\nexperiment = kato\n")
    assert cli.main(["spectrum", "--config", str(cfg)]) == 1
    assert "config requests experiment" in capsys.readouterr().err


def test_qlab_out_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("QLAB_OUT", str(tmp_path))
    rc = cli.main(["spectrum", "--n", "2", "--K", "4"])
    assert rc == 0
    assert (tmp_path / "spectrum.csv").exists()


def test_counterexample_json_contents(tmp_path):
    rc = cli.main(["counterexample", "--out", str(tmp_path), "--n", "3",
                   "--K", "128"])
    assert rc == 0
    payload = json.loads((tmp_path / "counterexample.json").read_text())
    assert payload["summary"]["residual_within_bound"] is True
    assert payload["summary"]["kato_classification"] == "not-in-Kato"
    assert payload["summary"]["verdict"] == "pass"


def test_repeat_runs_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        out.mkdir()
        assert cli.main(["square-function", "--out", str(out), "--K", "32"]) == 0
    assert (a / "square-function.csv").read_bytes() == \
        (b / "square-function.csv").read_bytes()


def test_failed_verdict_exit_code(tmp_path):
    # an impossibly tight heat tolerance forces a fail verdict -> exit 2
    rc = cli.main(["heat", "--out", str(tmp_path), "--K", "32",
                   "--ts", "0.2,0.3,0.4,0.5", "--tol", "1e-9"])
    assert rc == 2
    payload = json.loads((tmp_path / "heat.json").read_text())
    assert payload["summary"]["verdict"] == "fail"
