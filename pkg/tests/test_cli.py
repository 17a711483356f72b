"""Command line interface: config parsing, exit codes, artifacts."""

import csv
import json
import os

import pytest

from ddfv.cli import ConfigError, load_config, main


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out


def test_face_concentration_artifact(tmp_path):
    out = tmp_path / "fc"
    assert main(["face-concentration", "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out / "face_concentration.csv")))
    assert len(rows) == 401
    assert set(rows[0]) == {"dphi", "centered", "sedan", "activity",
                            "bess_ch"}
    meta = json.loads((out / "meta.json").read_text())
    assert meta["experiment"] == "face_concentration"
    assert "versions" in meta


def test_run1d_with_config_and_scheme_flag(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text(
        'preset = "evolii"\nn_cells = 20\nt_end = 0.01\nt1 = 1e-3\n'
        'delta = 1.5\n\n[solver]\nnewton_tol = 1e-9\n')
    out = tmp_path / "run"
    code = main(["run1d", "--config", str(cfg), "--scheme", "sedan",
                 "--out", str(out)])
    assert code == 0
    assert (out / "energy_sedan.csv").exists()
    assert not (out / "energy_centered.csv").exists()
    meta = json.loads((out / "meta.json").read_text())
    assert meta["preset"] == "evolii"
    assert meta["solver"]["newton_tol"] == 1e-9


def test_unknown_config_key_rejected(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("bogus = 1\n")
    assert main(["run1d", "--config", str(cfg)]) == 3


def test_wrong_type_rejected(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text('n_cells = "many"\n')
    assert main(["run1d", "--config", str(cfg)]) == 3


def test_unknown_solver_key_rejected(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("[solver]\nturbo = true\n")
    assert main(["run1d", "--config", str(cfg)]) == 3


def test_unknown_scheme_rejected(tmp_path):
    assert main(["run1d", "--scheme", "upwind",
                 "--out", str(tmp_path / "x")]) == 3


def test_load_config_float_coercion(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("t_end = 10\n")  # int is fine where float is expected
    out = load_config(str(cfg), "run1d")
    assert out["t_end"] == 10.0 and isinstance(out["t_end"], float)


def test_load_config_rejects_bool_as_number(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("t_end = true\n")
    with pytest.raises(ConfigError):
        load_config(str(cfg), "run1d")


def test_missing_config_file():
    assert main(["run1d", "--config", "/nonexistent.toml"]) == 3


def test_csv_outputs_deterministic(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    for out in (out_a, out_b):
        assert main(["face-concentration", "--out", str(out)]) == 0
    text_a = (out_a / "face_concentration.csv").read_text()
    text_b = (out_b / "face_concentration.csv").read_text()
    assert text_a == text_b


def test_entry_point_installed():
    import shutil
    exe = shutil.which("ddfv")
    assert exe is not None
