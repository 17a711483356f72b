"""Experiment drivers: artifacts, presets, determinism."""

import csv
import json

import numpy as np
import pytest

from ddfv.experiments import (PRESETS_1D, face_concentration_table, fet,
                              make_fet_spec, run1d, selftest)
from ddfv.fluxes import SchemeKind


def test_presets_cover_three_initial_conditions():
    assert set(PRESETS_1D) == {"evoli", "evolii", "evoliii"}
    assert PRESETS_1D["evoli"]["phi_left"] == 10.0
    assert PRESETS_1D["evolii"]["c0"] == 0.3
    assert PRESETS_1D["evoliii"]["c0"] == 0.7


def test_run1d_artifacts(tmp_path):
    summary = run1d(str(tmp_path), schemes=[SchemeKind.SEDAN],
                    n_cells=20, t_end=0.01, t1=1e-3, delta=1.5)
    assert "sedan" in summary
    rows = list(csv.DictReader(open(tmp_path / "energy_sedan.csv")))
    # energy is written relative to the final state, which is then zero
    assert float(rows[-1]["energy_rel"]) == 0.0
    rels = [float(r["energy_rel"]) for r in rows]
    assert all(b <= a + 1e-9 for a, b in zip(rels, rels[1:]))
    profiles = list(csv.DictReader(open(tmp_path / "profiles_sedan.csv")))
    assert len(profiles) % 20 == 0
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["experiment"] == "run1d"


def test_run1d_rejects_unknown_preset(tmp_path):
    with pytest.raises(ValueError):
        run1d(str(tmp_path), preset="evolx")


def test_fet_spec_geometry():
    spec = make_fet_spec(SchemeKind.SEDAN, n_ref=1, u_gate=-3.0)
    spec.validate()
    assert spec.mesh.n_cells == 21 * 11
    groups = set(spec.mesh.bface_groups)
    assert groups == {"source", "gate", "drain", "insulating"}


def test_fet_short_sweep_writes_iv(tmp_path):
    summary = fet(str(tmp_path), schemes=[SchemeKind.CENTERED], n_ref=1,
                  gate_max=5.0, gate_min=-5.0, gate_points=3)
    rows = list(csv.DictReader(open(tmp_path / "iv.csv")))
    assert len(rows) == 3
    assert summary["centered"]["max_balance_error"] < 1e-8


def test_face_concentration_table_columns(tmp_path):
    path = face_concentration_table(str(tmp_path), steps=11)
    data = np.genfromtxt(path, delimiter=",", names=True)
    assert data.shape == (11,)
    assert np.allclose(data["centered"], 0.5, atol=1e-14)


def test_selftest_all_pass():
    assert all(passed for _, passed in selftest())
