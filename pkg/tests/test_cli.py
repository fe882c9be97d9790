import json

import numpy as np
import pytest

from westervelt import io
from westervelt.cli import EXIT_CONFIG, EXIT_GUARD, EXIT_IO, EXIT_OK, main
from westervelt.config import load_config


@pytest.fixture(autouse=True)
def output_root(tmp_path, monkeypatch):
    monkeypatch.setenv("WESTERVELT_OUTPUT_ROOT", str(tmp_path / "runs"))
    return tmp_path / "runs"


def _manifest(run_dir):
    return io.read_json(run_dir / "manifest.json")


def test_preset_list_and_dump(capsys):
    assert main(["preset", "--list"]) == EXIT_OK
    names = capsys.readouterr().out.split()
    assert "westervelt-1d" in names and "validate" in names
    assert main(["preset", "--dump", "westervelt-2d"]) == EXIT_OK
    cfg = json.loads(capsys.readouterr().out)
    assert load_config(cfg)["h"] == 0.05


def test_profile_run_and_determinism(output_root):
    assert main(["profile"]) == EXIT_OK
    first = _manifest(output_root / "burgers-profile")
    assert main(["profile"]) == EXIT_OK
    second = _manifest(output_root / "burgers-profile")
    assert io.strip_timing(first) == io.strip_timing(second)
    (ray,) = first["scalars"]["rays"]
    assert ray["tilt_error"] < 1e-6
    assert "ray000.csv" in first["artifacts"]


def test_fdtd_run_writes_terminal_and_plots(output_root):
    assert main(["fdtd", "--ppw", "40"]) == EXIT_OK
    run = output_root / "westervelt-1d"
    m = _manifest(run)
    assert m["status"] == "ok" and m["config"]["grid"]["ppw"] == 40
    assert m["scalars"]["crest_lead"] > 0
    values, header = io.read_grid(run / "terminal")
    assert values.shape == tuple(header["shape"])
    assert main(["emit-plots", str(run)]) == EXIT_OK
    rows = io.read_csv(run / "plots" / "terminal.csv")
    assert set(rows) == {"x", "p_nonlinear", "p_linear"}


def test_sinogram_then_reconstruct(output_root, tmp_path):
    args = ["sinogram", "--mode", "exact", "--angles", "12", "--offsets", "24", "--set", "reconstruction.n=32"]
    assert main(args) == EXIT_OK
    run = output_root / "tomography-profile"
    m = _manifest(run)
    assert m["scalars"]["max_error"] == 0.0
    assert m["scalars"]["reconstruction"]["relative_rmse"] < 0.2
    out = tmp_path / "rec"
    assert main(["reconstruct", str(run), "--n", "32", "--output", str(out)]) == EXIT_OK
    rec, _ = io.read_image(out / "image")
    first, _ = io.read_image(run / "image")
    assert np.allclose(rec.values, first.values, atol=1e-12)
    assert main(["emit-plots", str(run)]) == EXIT_OK
    assert (run / "plots" / "sinogram.csv").exists() and (run / "plots" / "image.csv").exists()


def test_validate_quick(output_root):
    assert main(["validate", "--quick"]) == EXIT_OK
    rows = io.read_json(output_root / "validate" / "invariants.json")
    assert all(r["passed"] for r in rows) and len(rows) == 7


@pytest.mark.parametrize(
    "argv,code",
    [
        (["fdtd", "--set", "solver.cfl=0.9"], EXIT_CONFIG),
        (["fdtd", "--preset", "missing"], EXIT_CONFIG),
        (["fdtd", "--set", "field.amplitude=40"], EXIT_GUARD),
        (["reconstruct", "/nonexistent/sinogram"], EXIT_IO),
        (["emit-plots", "/nonexistent"], EXIT_IO),
    ],
)
def test_exit_codes(argv, code, capsys):
    assert main(argv) == code
    assert capsys.readouterr().err


def test_config_file(tmp_path, output_root):
    cfg = load_config({"mode": "profile", "name": "from-file", "field": {"type": "zero", "dim": 1},
                       "profile": {"rays": [{"base": [0.0], "direction": [1.0], "length": 1.0}]}})
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    assert main(["profile", "--config", str(path), "--set", "profile.n_theta=256"]) == EXIT_OK
    m = _manifest(output_root / "from-file")
    assert m["config"]["profile"]["n_theta"] == 256
    assert main(["fdtd", "--config", str(path)]) == EXIT_CONFIG
    path.write_text("{broken")
    assert main(["profile", "--config", str(path)]) == EXIT_CONFIG
