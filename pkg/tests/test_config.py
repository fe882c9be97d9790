import json

import numpy as np
import pytest

from westervelt.config import (
    PRESETS,
    build_acquisition,
    build_fdtd_config,
    build_field,
    load_config,
    preset,
    preset_fdtd_config,
)
from westervelt.errors import ConfigError
from westervelt.nonlinearity import DiskField, GaussianField, MovedField, SampledField, SumField, ZeroField


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_validate(name):
    cfg = load_config(preset(name))
    assert cfg["mode"] in ("fdtd", "profile", "sinogram", "validate")


def test_preset_is_a_copy():
    cfg = preset("westervelt-1d")
    cfg["h"] = 1.0
    assert preset("westervelt-1d")["h"] == 0.02


def test_unknown_preset():
    with pytest.raises(ConfigError):
        preset("nope")


@pytest.mark.parametrize(
    "tweak,path",
    [
        (lambda c: c["solver"].update(cfl=0.9), "$.solver.cfl"),
        (lambda c: c.update(h=-1.0), "$.h"),
        (lambda c: c["field"].update(width="wide"), "$.field"),
        (lambda c: c["grid"].update(upper=[-2.0]), "$.grid.upper"),
        (lambda c: c.update(direction=[0.5]), "$.direction"),
        (lambda c: c.update(direction=[1.0, 0.0]), "$.direction"),
        (lambda c: c["grid"].pop("ppw"), "$.grid"),
        (lambda c: c.pop("envelope"), "$"),
        (lambda c: c.update(mode="dance"), "$.mode"),
    ],
)
def test_errors_carry_json_paths(tweak, path):
    cfg = preset("westervelt-1d")
    tweak(cfg)
    with pytest.raises(ConfigError) as info:
        load_config(cfg)
    assert info.value.path.startswith(path)
    assert str(info.value).startswith(info.value.path)


def test_load_from_file_and_string(tmp_path):
    cfg = preset("burgers-profile")
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg))
    assert load_config(p) == load_config(json.dumps(cfg)) == load_config(cfg)
    with pytest.raises(ConfigError):
        load_config("{not json")


def test_field_builders():
    assert isinstance(build_field({"type": "zero", "dim": 2}), ZeroField)
    g = build_field({"type": "gaussian", "amplitude": 2.0, "width": 0.5, "center": [0.1, 0.2]})
    assert isinstance(g, GaussianField) and g.dim == 2
    assert g(np.array([[0.1, 0.2]]))[0] == pytest.approx(2.0)
    d = build_field({"type": "disk", "amplitude": 1.0, "radius": 0.3, "center": [0.0, 0.0]})
    assert isinstance(d, DiskField)
    s = build_field({"type": "sum", "terms": [{"type": "constant", "value": 1.0, "dim": 1}, {"type": "constant", "value": 2.0, "dim": 1}]})
    assert isinstance(s, SumField) and s(np.array([[0.0]]))[0] == 3.0
    m = build_field({"type": "moved", "angle": 0.5, "shift": [0.1], "base": {"type": "disk", "amplitude": 1.0, "radius": 0.2, "center": [0.0, 0.0]}})
    assert isinstance(m, MovedField)
    sm = build_field({"type": "sampled", "shape": [3], "origin": [0.0], "spacing": [0.5], "values": [0.0, 1.0, 0.0]})
    assert isinstance(sm, SampledField) and sm(np.array([[0.5]]))[0] == pytest.approx(1.0)


def test_random_phantom_is_seeded():
    spec = {"type": "random_gaussians", "count": 3, "dim": 2}
    pts = np.random.default_rng(1).uniform(-0.5, 0.5, (20, 2))
    a, b = build_field(spec, seed=7)(pts), build_field(spec, seed=7)(pts)
    c = build_field(spec, seed=8)(pts)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_fdtd_config_from_preset():
    cfg = preset_fdtd_config("westervelt-1d")
    assert cfg.h == 0.02 and cfg.T == 1.4
    assert cfg.spacing[0] == pytest.approx(2 * np.pi * 0.02 / 160)
    assert cfg.start == "cauchy"
    with pytest.raises(ConfigError):
        preset_fdtd_config("burgers-profile")


def test_explicit_spacing_wins():
    cfg = preset("westervelt-1d")
    cfg["grid"] = {"lower": [-1.0], "upper": [1.0], "spacing": [0.01]}
    assert build_fdtd_config(load_config(cfg)).spacing == (0.01,)


def test_acquisition_builder():
    mode, n_a, n_o, kw = build_acquisition(load_config(preset("tomography-fdtd")))
    assert (mode, n_a, n_o) == ("fdtd", 20, 24)
    assert kw["half_width"] == 1.0
