"""Config validation, command execution, artifact schemas, CLI behavior."""

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from freejac.harness import (
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    ConfigError,
    emit_plot_script,
    parse_config,
    run,
    run_config,
)

SQRT2 = float(np.sqrt(2.0))


def base_config(command, **extra):
    cfg = {
        "command": command,
        "network": {"depth": 2, "width": 16, "sigma_w": SQRT2, "activation": "relu"},
        "n_sweep": [16, 32],
        "trials": 4,
        "seed": 9,
        "moment_order": 2,
    }
    cfg.update(extra)
    return cfg


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def test_unknown_command_rejected():
    with pytest.raises(ConfigError, match="command"):
        parse_config({"command": "train"})


def test_negative_sigma_names_field():
    cfg = base_config("theory-profile")
    cfg["network"]["sigma_w"] = -2.0
    with pytest.raises(ConfigError, match="network.*sigma_w"):
        parse_config(cfg)


def test_sweep_must_ascend():
    cfg = base_config("verify-freeness", n_sweep=[64, 16])
    with pytest.raises(ConfigError, match="n_sweep"):
        parse_config(cfg)


def test_trials_must_be_positive():
    cfg = base_config("verify-freeness", trials=0)
    with pytest.raises(ConfigError, match="trials"):
        parse_config(cfg)


def test_layer_bounds_checked():
    cfg = base_config("simulate-spectrum", layer=5)
    with pytest.raises(ConfigError, match="layer"):
        parse_config(cfg)


def test_defaults_fill_in():
    cfg = parse_config({"command": "theory-profile",
                        "network": {"depth": 1, "width": 8, "sigma_w": 1.0,
                                    "activation": "tanh"}})
    assert cfg.trials == 10
    assert cfg.n_sweep == (8,)


# ---------------------------------------------------------------------------
# command execution
# ---------------------------------------------------------------------------


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_theory_profile_artifacts(tmp_path):
    report, code = run_config(base_config("theory-profile"), out_dir=tmp_path)
    assert code == EXIT_OK
    rows = read_csv(tmp_path / "theory-profile_profile.csv")
    assert [r["layer"] for r in rows] == ["1", "2"]
    assert float(rows[0]["preact_variance"]) == pytest.approx(2.0)
    assert (tmp_path / "report.json").exists()
    assert (tmp_path / "plots.py").exists()


def test_simulate_spectrum_tables(tmp_path):
    cfg = base_config("simulate-spectrum", target="jacobian", layer=2, bins=8)
    report, code = run_config(cfg, out_dir=tmp_path)
    assert code == EXIT_OK
    hist = read_csv(tmp_path / "simulate-spectrum_histogram.csv")
    assert sum(int(r["count"]) for r in hist) == 16
    moments = read_csv(tmp_path / "simulate-spectrum_moments.csv")
    assert len(moments) == 2


def test_simulate_spectrum_oracle_target(tmp_path):
    cfg = base_config("simulate-spectrum", target="cfim_oracle")
    report, code = run_config(cfg, out_dir=tmp_path)
    assert code == EXIT_OK


def test_predict_vs_empirical_schema(tmp_path):
    cfg = base_config("predict-vs-empirical", n_sweep=[64], trials=6)
    cfg["network"]["width"] = 64
    report, code = run_config(cfg, out_dir=tmp_path)
    rows = read_csv(tmp_path / "predict-vs-empirical_moments.csv")
    keys = {"target", "layer", "width", "moment_order", "empirical", "stderr",
            "theory", "rel_err", "within_tolerance"}
    assert keys <= set(rows[0])
    targets = {r["target"] for r in rows}
    assert targets == {"jacobian", "fim"}


def test_verify_invariance_runs(tmp_path):
    cfg = base_config("verify-invariance", trials=400)
    cfg["network"] = {"depth": 1, "width": 12, "sigma_w": 1.0, "activation": "tanh"}
    report, code = run_config(cfg, out_dir=tmp_path)
    assert code == EXIT_OK
    assert report["payload"]["results"]["proper"]["passed"]
    assert report["payload"]["results"]["broken_control"]["passed"]


def test_verify_cutoff_all_hold(tmp_path):
    report, code = run_config(base_config("verify-cutoff", trials=10), out_dir=tmp_path)
    assert code == EXIT_OK
    rows = read_csv(tmp_path / "verify-cutoff_grid.csv")
    assert all(r["violations"] == "0" for r in rows)


def test_verify_freeness_reports(tmp_path):
    cfg = base_config("verify-freeness", n_sweep=[32, 64], trials=6,
                      tolerances={"freeness_tol": 0.2})
    report, code = run_config(cfg, out_dir=tmp_path)
    assert code == EXIT_OK
    names = set(report["payload"]["results"])
    assert "negative_control_dependent_letters" in names
    assert any(n.startswith("degree2") for n in names)


def test_gaussian_propagation_pass(tmp_path):
    cfg = base_config("gaussian-propagation", n_sweep=[128, 1024], trials=6)
    cfg["network"] = {"depth": 3, "width": 1024, "sigma_w": SQRT2, "activation": "tanh"}
    cfg["tolerances"] = {"ks_tol": 0.2}
    report, code = run_config(cfg, out_dir=tmp_path)
    assert code == EXIT_OK
    assert report["payload"]["results"]["shrinks_with_width"]


def test_fim_duality_counts(tmp_path):
    cfg = base_config("fim-duality")
    cfg["network"]["width"] = 12
    report, code = run_config(cfg, out_dir=tmp_path)
    assert code == EXIT_OK
    rows = read_csv(tmp_path / "fim-duality_duality.csv")
    assert rows[0]["zero_eigenvalues"] == str(2 * 12 * 12 - 12)
    assert report["payload"]["results"]["eigenvalues_match"]


# ---------------------------------------------------------------------------
# determinism, overrides, plotting
# ---------------------------------------------------------------------------


def test_payload_byte_identical_across_reruns(tmp_path):
    cfg = base_config("verify-cutoff", trials=5)
    r1, _ = run_config(cfg, out_dir=tmp_path / "a")
    r2, _ = run_config(cfg, out_dir=tmp_path / "b")
    assert json.dumps(r1["payload"], sort_keys=True) == json.dumps(r2["payload"], sort_keys=True)


def test_seed_override_changes_results(tmp_path):
    cfg = base_config("verify-cutoff", trials=5)
    r1, _ = run_config(cfg, out_dir=tmp_path / "a")
    r2, _ = run_config(cfg, out_dir=tmp_path / "b", seed=123)
    assert r2["payload"]["seed"] == 123
    assert json.dumps(r1["payload"]) != json.dumps(r2["payload"])


def test_threads_do_not_change_payload(tmp_path):
    cfg = base_config("gaussian-propagation", n_sweep=[64, 128], trials=4)
    cfg["network"] = {"depth": 2, "width": 128, "sigma_w": 1.0, "activation": "tanh"}
    cfg["tolerances"] = {"ks_tol": 0.5}
    r1, _ = run_config(cfg, out_dir=tmp_path / "a", threads=1)
    r2, _ = run_config(cfg, out_dir=tmp_path / "b", threads=4)
    assert json.dumps(r1["payload"], sort_keys=True) == json.dumps(r2["payload"], sort_keys=True)


def test_plot_script_runs(tmp_path):
    run_config(base_config("theory-profile"), out_dir=tmp_path)
    proc = subprocess.run([sys.executable, str(tmp_path / "plots.py")],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert any(p.suffix == ".png" for p in tmp_path.iterdir())


def test_plot_script_refuses_empty_report(tmp_path):
    with pytest.raises(ValueError, match="no tables"):
        emit_plot_script({"payload": {"tables": []}}, tmp_path)


# ---------------------------------------------------------------------------
# CLI surface
# ---------------------------------------------------------------------------


def test_cli_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(base_config("theory-profile")).replace('"relu"', '"nope"'))
    assert run(str(bad), out_dir=str(tmp_path)) == EXIT_CONFIG_ERROR


def test_cli_missing_file_exit_code(tmp_path):
    assert run(str(tmp_path / "absent.json")) == EXIT_CONFIG_ERROR


def test_cli_invalid_json_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(str(bad)) == EXIT_CONFIG_ERROR


def test_cli_subprocess_roundtrip(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(base_config("theory-profile",
                                                output_dir=str(tmp_path / "out"))))
    proc = subprocess.run(
        [sys.executable, "-m", "freejac.cli", "run", str(cfg_path), "--seed", "5"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["payload"]["seed"] == 5
