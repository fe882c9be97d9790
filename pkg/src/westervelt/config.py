"""JSON experiment configs: schema, field/envelope builders and named presets.

A config is one JSON document.  ``mode`` selects the pipeline; field and
envelope entries are either a named closed form with parameters or a sampled
grid (row-major values, origin, spacing).
"""

from __future__ import annotations

import copy
import json
import math
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigError
from .linear_go import (
    BeamEnvelope,
    ConstantProfile,
    FunctionEnvelope,
    GaussianProfile,
    PlateauProfile,
    PolynomialProfile,
)
from .nonlinearity import (
    BoxField,
    ConstantField,
    DiskField,
    GaussianField,
    MovedField,
    RigidMotion,
    SampledField,
    SumField,
    ZeroField,
    planar_rotation,
)

MODES = ("profile", "fdtd", "sinogram", "reconstruct", "validate")

_pos = {"type": "number", "exclusiveMinimum": 0}
_vec = {"type": "array", "items": {"type": "number"}, "minItems": 1, "maxItems": 3}
_posvec = {"type": "array", "items": _pos, "minItems": 1, "maxItems": 3}

_FIELD = {
    "type": "object",
    "required": ["type"],
    "properties": {"type": {"enum": ["zero", "constant", "box", "gaussian", "disk", "sum", "sampled", "moved", "random_gaussians"]}},
    "allOf": [
        {
            "if": {"properties": {"type": {"const": "zero"}}},
            "then": {"properties": {"dim": {"enum": [1, 2, 3]}}},
        },
        {
            "if": {"properties": {"type": {"const": "constant"}}},
            "then": {"required": ["value"], "properties": {"value": {"type": "number"}, "dim": {"enum": [1, 2, 3]}}},
        },
        {
            "if": {"properties": {"type": {"const": "box"}}},
            "then": {"required": ["value", "lower", "upper"], "properties": {"value": {"type": "number"}, "lower": _vec, "upper": _vec}},
        },
        {
            "if": {"properties": {"type": {"const": "gaussian"}}},
            "then": {
                "required": ["amplitude", "width"],
                "properties": {
                    "amplitude": {"type": "number"},
                    "width": {"oneOf": [_pos, _posvec]},
                    "center": _vec,
                    "dim": {"enum": [1, 2, 3]},
                },
            },
        },
        {
            "if": {"properties": {"type": {"const": "disk"}}},
            "then": {
                "required": ["amplitude", "radius"],
                "properties": {"amplitude": {"type": "number"}, "radius": _pos, "center": _vec, "edge": _pos},
            },
        },
        {
            "if": {"properties": {"type": {"const": "sum"}}},
            "then": {"required": ["terms"], "properties": {"terms": {"type": "array", "minItems": 1, "items": {"$ref": "#/$defs/field"}}}},
        },
        {
            "if": {"properties": {"type": {"const": "sampled"}}},
            "then": {
                "required": ["values", "shape", "origin", "spacing"],
                "properties": {
                    "values": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                    "shape": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1, "maxItems": 3},
                    "origin": _vec,
                    "spacing": _posvec,
                    "order": {"type": "integer", "minimum": 0, "maximum": 5},
                },
            },
        },
        {
            "if": {"properties": {"type": {"const": "moved"}}},
            "then": {
                "required": ["base"],
                "properties": {"base": {"$ref": "#/$defs/field"}, "shift": _vec, "angle": {"type": "number"}},
            },
        },
        {
            "if": {"properties": {"type": {"const": "random_gaussians"}}},
            "then": {
                "required": ["count"],
                "properties": {
                    "count": {"type": "integer", "minimum": 1},
                    "amplitude": _posvec,
                    "width": _posvec,
                    "radius": _pos,
                    "dim": {"enum": [1, 2, 3]},
                },
            },
        },
    ],
}

_PROFILE = {
    "type": "object",
    "required": ["type"],
    "properties": {"type": {"enum": ["gaussian", "plateau", "polynomial", "constant"]}},
    "allOf": [
        {
            "if": {"properties": {"type": {"const": "gaussian"}}},
            "then": {"required": ["center", "width"], "properties": {"center": {"type": "number"}, "width": _pos, "amplitude": _pos}},
        },
        {
            "if": {"properties": {"type": {"const": "plateau"}}},
            "then": {
                "required": ["center", "half_width", "edge"],
                "properties": {"center": {"type": "number"}, "half_width": _pos, "edge": _pos, "amplitude": _pos},
            },
        },
        {
            "if": {"properties": {"type": {"const": "polynomial"}}},
            "then": {"required": ["coefficients"], "properties": {"coefficients": {"type": "array", "items": {"type": "number"}, "minItems": 1}}},
        },
        {
            "if": {"properties": {"type": {"const": "constant"}}},
            "then": {"properties": {"value": _pos}},
        },
    ],
}

_ENVELOPE = {
    "type": "object",
    "required": ["type"],
    "properties": {"type": {"enum": ["beam", "sampled"]}},
    "allOf": [
        {
            "if": {"properties": {"type": {"const": "beam"}}},
            "then": {
                "required": ["longitudinal"],
                "properties": {
                    "longitudinal": {"$ref": "#/$defs/profile"},
                    "transverse": {"type": "array", "items": {"$ref": "#/$defs/profile"}, "maxItems": 2},
                },
            },
        },
        {
            "if": {"properties": {"type": {"const": "sampled"}}},
            "then": {
                "required": ["values", "shape", "origin", "spacing"],
                "properties": {
                    "values": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                    "shape": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1, "maxItems": 3},
                    "origin": _vec,
                    "spacing": _posvec,
                },
            },
        },
    ],
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["mode"],
    "additionalProperties": False,
    "$defs": {"field": _FIELD, "profile": _PROFILE, "envelope": _ENVELOPE},
    "properties": {
        "mode": {"enum": list(MODES)},
        "name": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "output": {"type": ["string", "null"]},
        "field": {"$ref": "#/$defs/field"},
        "envelope": {"$ref": "#/$defs/envelope"},
        "direction": _vec,
        "h": _pos,
        "T": _pos,
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["lower", "upper"],
            "properties": {"lower": _vec, "upper": _vec, "spacing": _posvec, "ppw": _pos},
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "cfl": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.5},
                "b0": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "tol": _pos,
                "max_iter": {"type": "integer", "minimum": 1},
                "boundary": {
                    "oneOf": [
                        {"enum": ["dirichlet", "mur", "periodic"]},
                        {"type": "array", "items": {"enum": ["dirichlet", "mur", "periodic"]}, "minItems": 1, "maxItems": 2},
                    ]
                },
                "start": {"enum": ["cauchy", "forward"]},
                "t0": {"type": "number", "minimum": 0},
                "snapshot_times": {"type": "array", "items": {"type": "number", "minimum": 0}},
                "linear_reference": {"type": "boolean"},
                "allow_shock": {"type": "boolean"},
            },
        },
        "profile": {
            "type": "object",
            "additionalProperties": False,
            "required": ["rays"],
            "properties": {
                "rays": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["base", "direction", "length"],
                        "properties": {"base": _vec, "direction": _vec, "length": _pos, "amplitude": _pos},
                    },
                },
                "amplitude": _pos,
                "n_theta": {"type": "integer", "minimum": 16},
                "levels": {"type": ["array", "null"], "items": {"type": "number"}},
                "K": {"type": "integer", "minimum": 2},
            },
        },
        "acquisition": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["exact", "profile", "fdtd"]},
                "n_angles": {"type": "integer", "minimum": 1},
                "n_offsets": {"type": "integer", "minimum": 1},
                "half_width": _pos,
                "radius": {"oneOf": [_pos, {"type": "null"}]},
                "workers": {"type": ["integer", "null"], "minimum": 1},
                "amplitude": _pos,
                "n_theta": {"type": "integer", "minimum": 16},
                "levels": {"type": ["array", "null"], "items": {"type": "number"}},
                "fdtd": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "h": _pos,
                        "ppw": _pos,
                        "transverse_spacing": _pos,
                        "radius": _pos,
                        "amplitude": _pos,
                        "longitudinal_half_width": _pos,
                        "longitudinal_edge": _pos,
                        "window_half_width": _pos,
                        "margin": _pos,
                        "K": {"type": "integer", "minimum": 2},
                        "cfl": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.5},
                        "b0": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                    },
                },
            },
        },
        "reconstruction": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "sinogram": {"type": "string"},
                "n": {"type": "integer", "minimum": 2},
                "half_width": _pos,
                "method": {"enum": ["fbp", "ridge"]},
                "cutoff": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "window": {"enum": ["hann", "none"]},
                "damp": {"type": "number", "minimum": 0},
            },
        },
        "validate": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"quick": {"type": "boolean"}},
        },
    },
    "allOf": [
        {"if": {"properties": {"mode": {"const": "profile"}}}, "then": {"required": ["field", "profile"]}},
        {"if": {"properties": {"mode": {"const": "fdtd"}}}, "then": {"required": ["field", "envelope", "direction", "h", "T", "grid"]}},
        {"if": {"properties": {"mode": {"const": "sinogram"}}}, "then": {"required": ["field", "acquisition"]}},
        {
            "if": {"properties": {"mode": {"const": "reconstruct"}}},
            "then": {"required": ["reconstruction"], "properties": {"reconstruction": {"required": ["sinogram"]}}},
        },
    ],
}


def _path(error):
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in error.absolute_path)


def validate_config(cfg):
    """Check ``cfg`` against :data:`SCHEMA` and the cross-field rules.

    Raises
    ------
    ConfigError
        With a JSON path (``$.solver.cfl``) naming the first offending entry.
    """
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: (len(list(e.absolute_path)), _path(e)))
    if errors:
        e = max(errors, key=lambda e: len(list(e.absolute_path)))
        raise ConfigError(f"{_path(e)}: {e.message}", _path(e))
    if cfg["mode"] == "fdtd":
        n = len(cfg["grid"]["lower"])
        for key in ("upper", "spacing"):
            if key in cfg["grid"] and len(cfg["grid"][key]) != n:
                raise ConfigError(f"$.grid.{key}: expected {n} entries", f"$.grid.{key}")
        if len(cfg["direction"]) != n:
            raise ConfigError(f"$.direction: expected {n} entries", "$.direction")
        if not np.all(np.asarray(cfg["grid"]["upper"]) > np.asarray(cfg["grid"]["lower"])):
            raise ConfigError("$.grid.upper: must exceed lower on every axis", "$.grid.upper")
        if "spacing" not in cfg["grid"] and "ppw" not in cfg["grid"]:
            raise ConfigError("$.grid: needs 'spacing' or 'ppw'", "$.grid")
        w = np.asarray(cfg["direction"], dtype=float)
        if abs(np.linalg.norm(w) - 1.0) > 1e-9:
            raise ConfigError("$.direction: must be a unit vector", "$.direction")
    return cfg


def load_config(source):
    """Parse and validate a config from a path, JSON string or dict."""
    if isinstance(source, dict):
        cfg = copy.deepcopy(source)
    else:
        text = str(source)
        try:
            if text.lstrip().startswith("{"):
                cfg = json.loads(text)
            else:
                cfg = json.loads(Path(text).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"$: invalid JSON ({exc.msg} at line {exc.lineno})", "$") from exc
    return validate_config(cfg)


# -- builders ------------------------------------------------------------------------


def _sampled_values(spec, where):
    shape = tuple(spec["shape"])
    values = np.asarray(spec["values"], dtype=float)
    if values.size != math.prod(shape):
        raise ConfigError(f"{where}.values: {values.size} entries do not fill shape {list(shape)}", f"{where}.values")
    if len(spec["origin"]) != len(shape) or len(spec["spacing"]) != len(shape):
        raise ConfigError(f"{where}: origin and spacing need {len(shape)} entries", where)
    return values.reshape(shape)


def build_field(spec, dim=None, seed=0, where="$.field"):
    """Nonlinearity field from its JSON description."""
    kind = spec["type"]
    d = spec.get("dim", dim)
    if kind == "zero":
        return ZeroField(dim=d or 1)
    if kind == "constant":
        return ConstantField(spec["value"], dim=d or 1)
    if kind == "box":
        return BoxField(spec["value"], tuple(spec["lower"]), tuple(spec["upper"]))
    if kind == "gaussian":
        center = spec.get("center")
        d = len(center) if center is not None else (d or 1)
        width = spec["width"]
        width = tuple(width) if isinstance(width, list) else width
        return GaussianField(spec["amplitude"], width, None if center is None else tuple(center), dim=d)
    if kind == "disk":
        return DiskField(spec["amplitude"], spec["radius"], tuple(spec.get("center", (0.0, 0.0))), spec.get("edge", 0.01))
    if kind == "sum":
        return SumField(tuple(build_field(t, dim, seed, f"{where}.terms[{i}]") for i, t in enumerate(spec["terms"])))
    if kind == "sampled":
        values = _sampled_values(spec, where)
        return SampledField(values, tuple(spec["origin"]), tuple(spec["spacing"]), spec.get("order", 3))
    if kind == "moved":
        base = build_field(spec["base"], dim, seed, f"{where}.base")
        if base.dim == 2:
            motion = RigidMotion(np.asarray(spec.get("shift", [0.0]), dtype=float), planar_rotation(spec.get("angle", 0.0)))
        else:
            if spec.get("angle", 0.0) != 0.0:
                raise ConfigError(f"{where}.angle: rotations are configurable for 2D fields only", f"{where}.angle")
            motion = RigidMotion(np.asarray(spec.get("shift", [0.0] * (base.dim - 1)), dtype=float), np.eye(base.dim))
        return MovedField(base, motion)
    if kind == "random_gaussians":
        rng = np.random.default_rng(seed)
        d = d or 2
        a_lo, a_hi = _range(spec.get("amplitude", [0.2, 0.6]))
        w_lo, w_hi = _range(spec.get("width", [0.15, 0.3]))
        r = spec.get("radius", 0.5)
        terms = []
        for _ in range(spec["count"]):
            c = rng.uniform(-r, r, size=d)
            while np.linalg.norm(c) > r:
                c = rng.uniform(-r, r, size=d)
            terms.append(GaussianField(float(rng.uniform(a_lo, a_hi)), float(rng.uniform(w_lo, w_hi)), tuple(c), dim=d))
        return SumField(tuple(terms))
    raise ConfigError(f"{where}.type: unknown field type {kind!r}", f"{where}.type")


def _range(v):
    v = list(v)
    return (v[0], v[0]) if len(v) == 1 else (v[0], v[1])


def build_profile(spec):
    kind = spec["type"]
    a = spec.get("amplitude", 1.0)
    if kind == "gaussian":
        return GaussianProfile(spec["center"], spec["width"], a)
    if kind == "plateau":
        return PlateauProfile(spec["center"], spec["half_width"], spec["edge"], a)
    if kind == "polynomial":
        return PolynomialProfile(tuple(spec["coefficients"]))
    return ConstantProfile(spec.get("value", 1.0))


def build_envelope(spec, where="$.envelope"):
    """Beam envelope from its JSON description."""
    if spec["type"] == "beam":
        return BeamEnvelope(build_profile(spec["longitudinal"]), tuple(build_profile(p) for p in spec.get("transverse", [])))
    values = _sampled_values(spec, where)
    origin = np.asarray(spec["origin"], dtype=float)
    spacing = np.asarray(spec["spacing"], dtype=float)
    interp = SampledField(values, tuple(origin), tuple(spacing))
    upper = origin + spacing * (np.array(values.shape) - 1)
    return FunctionEnvelope(interp.evaluate, values.ndim, tuple(origin), tuple(upper), float(values.max()))


def build_fdtd_config(cfg):
    """:class:`~westervelt.fdtd.FDTDConfig` from a validated ``fdtd`` config."""
    from .fdtd import FDTDConfig

    n = len(cfg["grid"]["lower"])
    alpha = build_field(cfg["field"], dim=n, seed=cfg.get("seed", 0))
    env = build_envelope(cfg["envelope"])
    if alpha.dim != n or env.dim != n:
        raise ConfigError(f"$.field: field, envelope and grid dimensions differ ({alpha.dim}, {env.dim}, {n})", "$.field")
    g = cfg["grid"]
    spacing = tuple(g["spacing"]) if "spacing" in g else (2 * math.pi * cfg["h"] / g["ppw"],) * n
    s = cfg.get("solver", {})
    boundary = s.get("boundary", "mur")
    if isinstance(boundary, list):
        boundary = tuple(boundary) if len(boundary) > 1 else boundary[0]
    return FDTDConfig(
        alpha=alpha,
        envelope=env,
        direction=tuple(cfg["direction"]),
        h=cfg["h"],
        T=cfg["T"],
        lower=tuple(g["lower"]),
        upper=tuple(g["upper"]),
        spacing=spacing,
        cfl=s.get("cfl", 0.4),
        b0=s.get("b0", 0.5),
        boundary=boundary,
        tol=s.get("tol", 1e-12),
        max_iter=s.get("max_iter", 25),
        start=s.get("start", "cauchy"),
        t0=s.get("t0", 0.0),
        snapshot_times=tuple(s.get("snapshot_times", ())),
        linear_reference=s.get("linear_reference", True),
        allow_shock=s.get("allow_shock", False),
        name=cfg.get("name", "custom"),
    )


def build_acquisition(cfg):
    """``(mode, kwargs)`` for :func:`~westervelt.tomography.assemble_sinogram`."""
    from .tomography import FdtdAcquisition, ProfileAcquisition

    a = cfg.get("acquisition", {})
    levels = a.get("levels")
    kw = {
        "half_width": a.get("half_width", 1.0),
        "radius": a.get("radius"),
        "workers": a.get("workers"),
        "profile": ProfileAcquisition(a.get("amplitude", 1.0), a.get("n_theta", 1024), None if levels is None else tuple(levels)),
        "fdtd": FdtdAcquisition(**a.get("fdtd", {}), levels=None if levels is None else tuple(levels)),
    }
    return a.get("mode", "profile"), a.get("n_angles", 60), a.get("n_offsets", 64), kw


# -- presets -------------------------------------------------------------------------

_ALPHA_1D = {"type": "gaussian", "amplitude": 1.0, "width": 0.3, "center": [0.0]}
# smooth bump essentially supported in [-1, -0.75] after the plateau edge
_CHI_1D = {
    "type": "beam",
    "longitudinal": {"type": "plateau", "center": -0.7, "half_width": 0.32, "edge": 0.03, "amplitude": 1.0},
}
_PHANTOM = {"type": "gaussian", "amplitude": 0.8, "width": 0.25, "center": [0.15, -0.1]}

PRESETS = {
    "westervelt-1d": {
        "mode": "fdtd",
        "name": "westervelt-1d",
        "seed": 0,
        "field": _ALPHA_1D,
        "envelope": _CHI_1D,
        "direction": [1.0],
        "h": 0.02,
        "T": 1.4,
        "grid": {"lower": [-1.6], "upper": [1.3], "ppw": 160},
        "solver": {"cfl": 0.4, "b0": 0.5, "boundary": "mur", "start": "cauchy", "snapshot_times": [0.7]},
    },
    "linear-1d": {
        "mode": "fdtd",
        "name": "linear-1d",
        "seed": 0,
        "field": {"type": "zero", "dim": 1},
        "envelope": _CHI_1D,
        "direction": [1.0],
        "h": 0.02,
        "T": 1.4,
        "grid": {"lower": [-1.6], "upper": [1.3], "ppw": 40},
        "solver": {"cfl": 0.4, "b0": 0.5, "boundary": "mur", "start": "cauchy", "linear_reference": False},
    },
    "westervelt-2d": {
        "mode": "fdtd",
        "name": "westervelt-2d",
        "seed": 0,
        "field": {"type": "gaussian", "amplitude": 1.0, "width": 0.3, "center": [0.0, 0.0]},
        "envelope": {
            "type": "beam",
            "longitudinal": {"type": "plateau", "center": -0.7, "half_width": 0.32, "edge": 0.03, "amplitude": 1.0},
            "transverse": [{"type": "gaussian", "center": 0.0, "width": 0.35}],
        },
        "direction": [0.0, 1.0],
        "h": 0.05,
        "T": 1.4,
        "grid": {"lower": [-1.4, -1.45], "upper": [1.4, 1.3], "ppw": 40},
        "solver": {"cfl": 0.4, "b0": 0.5, "boundary": "mur", "start": "cauchy"},
    },
    "tomography-profile": {
        "mode": "sinogram",
        "name": "tomography-profile",
        "seed": 0,
        "field": _PHANTOM,
        "acquisition": {"mode": "profile", "n_angles": 60, "n_offsets": 64, "half_width": 1.0},
        "reconstruction": {"n": 128, "method": "fbp", "cutoff": 1.0, "window": "hann"},
    },
    "tomography-fdtd": {
        "mode": "sinogram",
        "name": "tomography-fdtd",
        "seed": 0,
        "field": _PHANTOM,
        "acquisition": {"mode": "fdtd", "n_angles": 20, "n_offsets": 24, "half_width": 1.0},
        "reconstruction": {"n": 128, "method": "fbp", "cutoff": 1.0, "window": "hann"},
    },
    "burgers-profile": {
        "mode": "profile",
        "name": "burgers-profile",
        "seed": 0,
        "field": _ALPHA_1D,
        "profile": {"rays": [{"base": [-1.5], "direction": [1.0], "length": 3.0, "amplitude": 1.0}], "n_theta": 1024, "K": 32},
    },
    "validate": {"mode": "validate", "name": "validate", "validate": {"quick": False}},
}


def preset(name):
    """Deep copy of the named built-in config."""
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise ConfigError(f"$: unknown preset {name!r}; choose from {sorted(PRESETS)}", "$") from None


def preset_fdtd_config(name):
    cfg = load_config(preset(name))
    if cfg["mode"] != "fdtd":
        raise ConfigError(f"$.mode: preset {name!r} is not an fdtd preset", "$.mode")
    return build_fdtd_config(cfg)
