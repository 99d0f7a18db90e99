import json
import math
import os
import subprocess

import numpy as np
import pytest

import romef


def tiny_config(out):
    cfg = romef.preset_config("ci")
    cfg.pop("preset", None)
    cfg["mesh"] = {"cells": 300, "bias": 2.0}
    cfg["physics"].update(dt=0.01, T=0.4)
    cfg["snapshots"] = {"interval": 0.1}
    cfg["inlet_law"] = "unit"
    cfg["pod"]["supremizers"]["sup1"] = {"s": 3, "sbar": 2}
    cfg["online"] = {"timing_repeats": 1}
    cfg["output_dir"] = str(out)
    return cfg


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("pipeline")
    cfg = tiny_config(out)
    stages = romef.offline(cfg)
    assert all(ran for _, ran, _ in stages)
    romef.compare(cfg)
    return out, cfg


def test_presets_and_validation():
    assert romef.preset_names() == ["ci", "paper"]
    paper = romef.preset_config("paper")
    assert paper["physics"]["dt"] == pytest.approx(4e-4)
    assert romef.validate_config({"preset": "ci"}) == romef.preset_config("ci")
    with pytest.raises(romef.ConfigError, match="physics.nu"):
        romef.validate_config({"physics": {"nu": 1.0}})
    with pytest.raises(ValueError):
        romef.parse_stab_mode("sup9")


def test_mesh():
    mesh = romef.generate_cylinder_mesh(600)
    assert abs(mesh.n_cells - 600) < 100
    assert {p.name for p in mesh.patches} == {"inlet", "outlet", "walls", "cylinder"}
    assert mesh.total_area == pytest.approx(2.2 * 0.41 - math.pi * 0.05**2, rel=1e-3)
    assert mesh.cell_areas.sum() == pytest.approx(mesh.total_area)
    assert mesh.centroids.shape == (mesh.n_cells, 2)
    assert mesh.quality()["max_non_orthogonality_deg"] < 45.0


def test_pod_of_pipeline_snapshots(run_dir):
    out, _ = run_dir
    mesh = romef.load_mesh(out / "mesh.msh")
    v = romef.load_snapshots(out / "fom" / "v.snp")
    assert v.fingerprint == mesh.fingerprint
    assert v.shape[1] == len(v.times) == 4
    w = romef.snapshot_weights(mesh, 2)
    pod = romef.compute_basis(v, w, modes=3)
    phi = pod.modes.data
    gram = phi.T @ (w[:, None] * phi)
    assert np.abs(gram - np.eye(3)).max() < 1e-10
    assert np.all(np.diff(pod.cumulative) >= 0)
    # eigenvalues of C = S^T W S
    c = v.data.T @ (w[:, None] * v.data)
    np.testing.assert_allclose(pod.eigenvalues, np.sort(np.linalg.eigvalsh(c))[::-1], rtol=1e-9, atol=1e-14 * c.trace())
    with pytest.raises(romef.ConfigError):
        romef.compute_basis(v, w)


def test_stored_operators_replay_the_online_stage(run_dir):
    out, _ = run_dir
    ops = romef.load_operators(out / "operators" / "ppe.ops")
    assert ops.has("J") and ops.has("N")
    g = ops.tensors["G"]
    assert g.ndim == 3 and g.shape[0] == ops.matrices["M"].shape[0]
    rows = romef.read_csv(out / "online" / "ppe" / "trajectory.csv")
    tr = romef.run_rom(ops, romef.StabMode.PPE, 0.0, len(rows) - 1)
    assert tr.blow_up_step == -1
    beta = np.array([[r["beta_1"], r["beta_2"]] for r in rows]).T
    np.testing.assert_allclose(tr.beta, beta, rtol=1e-10, atol=1e-13)
    np.testing.assert_allclose(tr.aero[:, 0], [r["cd"] for r in rows], rtol=1e-10, atol=1e-13)


def test_run_rom_with_python_inlet_law():
    rng = np.random.default_rng(3)
    ops = romef.ReducedOperators()
    n = 2
    spd = lambda: (lambda a: a @ a.T + n * np.eye(n))(rng.standard_normal((n, n)))
    aug = lambda m: np.hstack([0.1 * rng.standard_normal((m.shape[0], 1)), m])
    mats = {
        "M": aug(spd()), "A": -aug(spd()), "Mt": rng.standard_normal((n, n + 1)), "B": rng.standard_normal((n, n)),
        "P": rng.standard_normal((n, n + 1)), "Mbar": aug(spd()), "Abar": -aug(spd()),
        "MtT": rng.standard_normal((n, n + 1)), "Bbar": rng.standard_normal((n, n)),
        "Pbar": rng.standard_normal((n, n + 1)), "D": spd(), "Dbar": spd(), "N": np.zeros((n, n + 1)),
        "Nbar": np.zeros((n, n + 1)), "F": np.zeros((n, n + 1)), "Fbar": np.zeros((n, n + 1)),
        "aero_u": np.zeros((4, n + 1)), "aero_q": np.zeros((4, n)),
        "beta0": np.zeros((n, 1)), "gamma0": np.zeros((n, 1)), "betabar0": np.zeros((n, 1)),
        "gammabar0": np.zeros((n, 1)),
    }
    ops.matrices = mats
    ops.tensors = {"G": np.zeros((n, n + 1, n + 1), order="F"), "J": np.zeros((n, n + 1, n + 1), order="F")}
    calls = []

    def law(t):
        calls.append(t)
        return 0.5

    tr = romef.run_rom(ops, romef.StabMode.SUP2, 0.0, 5, rho=1.0, mu=0.01, mu_bar=0.02, dt=0.1, law=law)
    assert len(tr.t) == 6 and tr.t[-1] == pytest.approx(0.5)
    assert calls
    assert np.isfinite(tr.beta).all()
    with pytest.raises(romef.ConfigError):
        romef.run_rom(ops, romef.StabMode.SUP2, 0.0, 5, rho=1.0)


def test_tables_and_resume(run_dir):
    out, cfg = run_dir
    rows = romef.read_csv(out / "compare" / "errors_summary.csv")
    assert {r["mode"] for r in rows} == {"nos", "ppe", "sup1", "sup2"}
    assert all(r["min"] <= r["avg"] <= r["max"] for r in rows)
    assert not any(ran for _, ran, _ in romef.offline(cfg))
    assert romef.summarize([1.0, 3.0]) == (1.0, 2.0, 3.0)


@pytest.mark.skipif("ROMEF_CLI" not in os.environ, reason="command-line tool path not given")
def test_cli_validate_config(tmp_path):
    cli = os.environ["ROMEF_CLI"]
    ok = subprocess.run([cli, "validate-config", "--preset", "paper"], capture_output=True, text=True)
    assert ok.returncode == 0
    assert json.loads(ok.stdout)["physics"]["T"] == 8.0
    (tmp_path / "bad.json").write_text('{"modes": ["none"]}')
    bad = subprocess.run([cli, "validate-config", "-c", str(tmp_path / "bad.json")], capture_output=True, text=True)
    assert bad.returncode == 2
