import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from manifold_hdr.cli import EXIT_INGEST, EXIT_INVALID, EXIT_OK, EXIT_USAGE, GRID_RES_ENV, main
from manifold_hdr.datasets import read_sample, write_sample
from manifold_hdr.density import bimodal_vmf_mixture
from manifold_hdr.manifolds import Manifold

S2 = Manifold.sphere()
T2 = Manifold.torus(2)


@pytest.fixture(scope="module")
def sphere_sample(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "sphere.csv"
    write_sample(path, S2, bimodal_vmf_mixture(10.0).sample(300, 11))
    return path


@pytest.fixture(scope="module")
def torus_sample(tmp_path_factory):
    rng = np.random.default_rng(5)
    base = rng.uniform(0, 2 * np.pi, 150)
    pts = np.column_stack([base, base + rng.normal(0, 0.3, 150)])
    path = tmp_path_factory.mktemp("data") / "torus.csv"
    write_sample(path, T2, pts)
    return path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


# -- usage ---------------------------------------------------------------------


def test_no_arguments_prints_usage(capsys):
    code, out, err = run([], capsys)
    assert code == EXIT_USAGE
    assert "usage" in err


def test_unknown_subcommand(capsys):
    code, _, err = run(["bootstrap"], capsys)
    assert code == EXIT_USAGE and "invalid choice" in err


def test_lam_and_gamma_are_exclusive(capsys, sphere_sample):
    code, _, _ = run(["estimate", "--sample", sphere_sample, "--lam", "0.4", "--gamma", "0.5", "--rn", "0.1"], capsys)
    assert code == EXIT_USAGE


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "manifold_hdr.cli"], capture_output=True, text=True)
    assert proc.returncode == EXIT_USAGE
    assert "estimate" in proc.stderr


# -- estimate -----------------------------------------------------------------------


def test_estimate_with_gamma(capsys, sphere_sample):
    code, out, _ = run(["estimate", "--sample", sphere_sample, "--gamma", "0.5", "--rn", "0.1", "--kappa", "20"], capsys)
    assert code == EXIT_OK
    d = json.loads(out)
    assert d["manifold"] == "sphere" and d["gamma"] == 0.5 and d["radius"] == 0.1
    assert d["n_components"] >= 1
    assert len(d["component_labels"]) == len(d["centers"])
    assert d["density"]["concentration"] == 20.0


def test_estimate_is_byte_identical(tmp_path, capsys, sphere_sample):
    outs = []
    for k in range(2):
        target = tmp_path / f"e{k}.json"
        code, _, _ = run(["estimate", "--sample", sphere_sample, "--lam", "0.3", "--rn", "0.1", "--out", target], capsys)
        assert code == EXIT_OK
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_estimate_with_analytic_density_and_plot(tmp_path, capsys, sphere_sample):
    dens = tmp_path / "d.json"
    dens.write_text(json.dumps(bimodal_vmf_mixture(10.0).to_dict()))
    png = tmp_path / "est.png"
    code, out, _ = run(
        ["estimate", "--sample", sphere_sample, "--density", dens, "--lam", "0.45", "--rn", "0.1", "--grid-res", 4000, "--plot", png],
        capsys,
    )
    assert code == EXIT_OK
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert "maximal_spacing" in json.loads(out)


def test_estimate_on_torus_with_plot(tmp_path, capsys, torus_sample):
    png = tmp_path / "t.png"
    code, out, _ = run(["estimate", "--sample", torus_sample, "--gamma", "0.5", "--rn", "0.4", "--plot", png, "--grid-res", 4096], capsys)
    assert code == EXIT_OK and png.exists()
    assert json.loads(out)["manifold"] == "torus2"


def test_density_on_wrong_manifold_is_invalid(tmp_path, capsys, torus_sample):
    dens = tmp_path / "d.json"
    dens.write_text(json.dumps(bimodal_vmf_mixture(10.0).to_dict()))
    code, _, err = run(["estimate", "--sample", torus_sample, "--density", dens, "--lam", "0.1", "--rn", "0.2"], capsys)
    assert code == EXIT_INVALID and "invalid" in err


def test_nonpositive_radius_is_invalid(capsys, sphere_sample):
    code, _, _ = run(["estimate", "--sample", sphere_sample, "--lam", "0.3", "--rn", "0", "--kappa", "20"], capsys)
    assert code == EXIT_INVALID


def test_missing_sample_is_ingestion_error(tmp_path, capsys):
    code, _, err = run(["estimate", "--sample", tmp_path / "none.csv", "--lam", "0.3", "--rn", "0.1"], capsys)
    assert code == EXIT_INGEST and "ingestion" in err


def test_level_subcommand(capsys, sphere_sample):
    code, out, _ = run(["level", "--sample", sphere_sample, "--gamma", "0.25", "--kappa", "20"], capsys)
    d = json.loads(out)
    assert code == EXIT_OK and d["n"] == 300 and d["lambda_hat"] > 0


# -- ingest ---------------------------------------------------------------------------


def test_ingest_comets(tmp_path, capsys):
    src = tmp_path / "orbits.csv"
    src.write_text("full_name,i,om\nA,90,90\nB,0,10\nB2,0.001,10.001\n")
    out = tmp_path / "comets.csv"
    code, text, _ = run(["ingest", "comets", src, "--out", out], capsys)
    assert code == EXIT_OK and json.loads(text)["n"] == 2
    man, pts = read_sample(out)
    assert man == S2 and np.allclose(pts[0], [1, 0, 0], atol=1e-15)


def test_ingest_bad_row_exit_code(tmp_path, capsys):
    src = tmp_path / "orbits.csv"
    src.write_text("i,om\n10,10\n200,10\n")
    code, _, err = run(["ingest", "comets", src, "--out", tmp_path / "x.csv"], capsys)
    assert code == EXIT_INGEST and "row 2" in err


def test_ingest_phases(tmp_path, capsys):
    src = tmp_path / "phases.csv"
    src.write_text("gene,heart,liver\nPer1,12,12\nPer2,0,6\n")
    out = tmp_path / "p.csv"
    assert run(["ingest", "phases", src, "--out", out], capsys)[0] == EXIT_OK
    man, pts = read_sample(out)
    assert man == T2 and np.allclose(pts, [[np.pi, np.pi], [0, np.pi / 2]])


# -- estimate files --------------------------------------------------------------------


@pytest.fixture
def estimate_file(tmp_path, capsys, sphere_sample):
    target = tmp_path / "est.json"
    code, _, _ = run(["estimate", "--sample", sphere_sample, "--lam", "0.3", "--rn", "0.15", "--kappa", "20", "--out", target], capsys)
    assert code == EXIT_OK
    return target


def test_export_boundary_uses_env_grid(tmp_path, capsys, estimate_file, sphere_sample, monkeypatch):
    monkeypatch.setenv(GRID_RES_ENV, "3000")
    out, png = tmp_path / "b.csv", tmp_path / "b.png"
    code, text, _ = run(["export-boundary", estimate_file, "--out", out, "--sample", sphere_sample, "--plot", png], capsys)
    assert code == EXIT_OK
    info = json.loads(text)
    assert info["grid_nodes"] == 3000
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == info["boundary_nodes"] > 0
    assert {"ortho_x", "ortho_y", "lon_deg", "lat_deg"} <= set(rows[0])
    assert png.exists()


def test_bad_env_grid_is_usage_error(tmp_path, capsys, estimate_file, monkeypatch):
    monkeypatch.setenv(GRID_RES_ENV, "lots")
    code, _, err = run(["export-boundary", estimate_file, "--out", tmp_path / "b.csv"], capsys)
    assert code == EXIT_USAGE and GRID_RES_ENV in err


def test_components_subcommand(capsys, estimate_file):
    est = json.loads(estimate_file.read_text())
    code, out, _ = run(["components", estimate_file], capsys)
    d = json.loads(out)
    assert code == EXIT_OK
    assert d["n_components"] == est["n_components"]
    assert sum(d["component_sizes"]) == len(est["centers"])


# -- simulation -------------------------------------------------------------------------


@pytest.fixture
def config_file(tmp_path):
    cfg = {"density": {"type": "bimodal_vmf", "kappa": 10.0}, "lam": 0.45, "rn": 0.08, "n_schedule": [200, 400], "reps": 1}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_convergence_writes_records_and_plot(tmp_path, capsys, config_file):
    base, png = tmp_path / "out" / "run", tmp_path / "box.png"
    code, out, _ = run(["convergence", config_file, "--out", base, "--plot", png, "--seed", "3"], capsys)
    assert code == EXIT_OK
    summary = json.loads(out)
    assert [g["n"] for g in summary["groups"]] == [200, 400]
    with open(base.with_suffix(".csv")) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 and {r["seed"] for r in rows} == {"3"}
    assert base.with_suffix(".summary.json").exists() and png.exists()


def test_simulate_is_deterministic(tmp_path, capsys, config_file):
    outs = []
    for k in range(2):
        base = tmp_path / f"r{k}"
        assert run(["simulate", config_file, "--out", base], capsys)[0] == EXIT_OK
        outs.append(base.with_suffix(".csv").read_bytes())
    assert outs[0] == outs[1]


def test_simulate_rejects_zero_reps(capsys, config_file):
    assert run(["simulate", config_file, "--reps", "0"], capsys)[0] == EXIT_INVALID


def test_simulate_rejects_coarse_grid(capsys, config_file):
    code, _, err = run(["simulate", config_file, "--grid-res", "2000"], capsys)
    assert code == EXIT_INVALID and "dispersion" in err
