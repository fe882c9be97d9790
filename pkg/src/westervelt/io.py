"""Artifact files: profiles, spectra, wave-field snapshots, sinograms, images and manifests.

Formats
-------
* profiles: CSV ``theta,U`` plus a JSON sidecar with ``M``, ``s_tilde`` and the ray;
* spectra: JSON list of ``[k, Re u_k, Im u_k]``;
* 1D grids: CSV with an ``x`` column and one column per named series;
* 2D grids: row-major little-endian float64 ``.bin`` plus a JSON header;
* sinograms: CSV ``angle,offset,value,truth,valid`` plus a 2D grid of values;
* manifests: canonical JSON; wall-clock data lives under ``timing`` only.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import platform
from pathlib import Path

import numpy as np

from . import __version__
from .harmonics import HarmonicSpectrum
from .profile_core import PhaseProfile
from .tomography import Reconstruction, Sinogram

TIMING_KEYS = ("timing",)


def _clean(obj):
    """JSON-safe copy: numpy scalars/arrays to Python, non-finite floats to ``None``."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def _fmt(v):
    return repr(float(v)) if math.isfinite(float(v)) else "nan"


def write_csv(path, header, columns):
    """Columns of equal length as a CSV table with full float precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = [np.asarray(c).ravel() for c in columns]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def read_csv(path):
    """``{column: float array}`` from a CSV written by :func:`write_csv`."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array(body, dtype=float).reshape(len(body), len(header))
    return {name: data[:, j] for j, name in enumerate(header)}


# -- profiles and spectra ------------------------------------------------------------


def write_profile(stem, profile, extra=None):
    """``<stem>.csv`` with ``theta,U`` and ``<stem>.json`` with the profile metadata."""
    stem = Path(stem)
    write_csv(stem.with_suffix(".csv"), ["theta", "U"], [profile.theta, profile.values])
    meta = profile.meta()
    if extra:
        meta.update(extra)
    write_json(stem.with_suffix(".json"), meta)
    return stem.with_suffix(".csv")


def read_profile(stem):
    stem = Path(stem)
    data = read_csv(stem.with_suffix(".csv"))
    meta = read_json(stem.with_suffix(".json")) if stem.with_suffix(".json").exists() else {}
    nan = lambda v: math.nan if v is None else v  # noqa: E731
    return PhaseProfile(data["U"], M=nan(meta.get("M")), s_tilde=nan(meta.get("s_tilde")), s=meta.get("s"))


def write_spectrum(path, spectrum):
    return write_json(path, {"s_tilde": spectrum.s_tilde, "M": spectrum.M, "coefficients": spectrum.to_records()})


def read_spectrum(path):
    doc = read_json(path)
    nan = lambda v: math.nan if v is None else v  # noqa: E731
    return HarmonicSpectrum.from_records(doc["coefficients"], nan(doc.get("s_tilde", 0.0)), nan(doc.get("M")))


# -- grids -----------------------------------------------------------------------------


def write_grid(stem, values, origin, spacing, meta=None, series=None):
    """Write a 1D (CSV) or 2D (binary + JSON header) grid.

    ``series`` maps extra column names to arrays of the same shape; in 2D each
    series gets its own ``.bin`` file listed in the header.
    """
    stem = Path(stem)
    values = np.asarray(values, dtype=float)
    series = {"p": values, **(series or {})}
    header = {
        "shape": list(values.shape),
        "origin": [float(o) for o in origin],
        "spacing": [float(d) for d in spacing],
        "dtype": "<f8",
        "order": "C",
        **(meta or {}),
    }
    if values.ndim == 1:
        x = origin[0] + spacing[0] * np.arange(values.size)
        path = write_csv(stem.with_suffix(".csv"), ["x", *series], [x, *series.values()])
        header["files"] = {name: path.name for name in series}
        write_json(stem.with_suffix(".json"), header)
        return path
    stem.parent.mkdir(parents=True, exist_ok=True)
    files = {}
    for name, arr in series.items():
        path = stem.parent / f"{stem.name}.{name}.bin"
        np.ascontiguousarray(np.asarray(arr, dtype="<f8")).tofile(path)
        files[name] = path.name
    header["files"] = files
    return write_json(stem.with_suffix(".json"), header)


def read_grid(stem, name="p"):
    """``(values, header)`` for a grid written by :func:`write_grid`."""
    stem = Path(stem)
    header = read_json(stem.with_suffix(".json"))
    if len(header["shape"]) == 1:
        return read_csv(stem.parent / header["files"][name])[name], header
    path = stem.parent / header["files"][name]
    values = np.fromfile(path, dtype=header["dtype"])
    if values.size != math.prod(header["shape"]):
        raise OSError(f"{path}: expected {math.prod(header['shape'])} values, found {values.size}")
    return values.reshape(header["shape"]), header


def write_snapshot(stem, grid, p, t, linear=None, meta=None):
    series = {} if linear is None else {"p_linear": np.asarray(linear).reshape(grid.shape)}
    return write_grid(stem, np.asarray(p).reshape(grid.shape), grid.origin, grid.spacing, {"t": t, **(meta or {})}, series)


# -- sinograms and images --------------------------------------------------------------


def write_sinogram(stem, sino, meta=None):
    """``<stem>.csv`` rows per ray and ``<stem>.json`` + ``.bin`` for the value grid."""
    stem = Path(stem)
    A, S = np.meshgrid(sino.angles, sino.offsets, indexing="ij")
    truth = sino.truth if sino.truth is not None else np.full(sino.shape, np.nan)
    write_csv(
        stem.with_suffix(".csv"),
        ["angle", "offset", "value", "truth", "valid"],
        [A, S, sino.values, truth, sino.mask.astype(int)],
    )
    failures = {f"{i},{j}": msg for (i, j), msg in sorted(sino.failures.items())}
    header = {
        "mode": sino.mode,
        "angles": sino.angles,
        "offsets": sino.offsets,
        "failures": failures,
        "meta": sino.meta,
        **(meta or {}),
    }
    series = {"mask": sino.mask.astype(float)}
    if sino.truth is not None:
        series["truth"] = sino.truth
    write_grid(stem, sino.values, (0.0, 0.0), (1.0, 1.0), header, series)
    return stem.with_suffix(".csv")


def read_sinogram(stem):
    stem = Path(stem)
    values, header = read_grid(stem)
    mask = read_grid(stem, "mask")[0].astype(bool)
    truth = read_grid(stem, "truth")[0] if "truth" in header["files"] else None
    failures = {tuple(int(v) for v in k.split(",")): msg for k, msg in header.get("failures", {}).items()}
    sino = Sinogram(header["angles"], header["offsets"], values, mask, truth, header["mode"], failures, header.get("meta", {}))
    return sino, header


def write_image(stem, rec, meta=None):
    """Reconstruction on the same grid format as 2D fdtd snapshots."""
    d = float(rec.axis[1] - rec.axis[0])
    series = {} if rec.truth is None else {"truth": rec.truth}
    info = {"method": rec.method, "rmse": rec.rmse, "relative_rmse": rec.relative_rmse, **(meta or {})}
    return write_grid(stem, rec.values, (rec.axis[0], rec.axis[0]), (d, d), info, series)


def read_image(stem):
    values, header = read_grid(stem)
    truth = read_grid(stem, "truth")[0] if "truth" in header["files"] else None
    axis = header["origin"][0] + header["spacing"][0] * np.arange(values.shape[0])
    return Reconstruction(values, axis, header.get("method", "fbp"), truth), header


# -- manifests -------------------------------------------------------------------------


def config_hash(cfg):
    """SHA-256 of the canonical JSON form of ``cfg``."""
    text = json.dumps(_clean(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def versions():
    import numba
    import scipy

    return {
        "westervelt": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
    }


def write_manifest(directory, cfg, scalars, artifacts, wall_time, status="ok"):
    """``manifest.json``: inputs hash, versions, key scalars and the list of artifacts."""
    doc = {
        "config": cfg,
        "inputs_hash": config_hash(cfg),
        "versions": versions(),
        "status": status,
        "scalars": scalars,
        "artifacts": sorted(str(Path(a).name) for a in artifacts),
        "timing": {"wall_time": wall_time},
    }
    return write_json(Path(directory) / "manifest.json", doc)


def strip_timing(manifest):
    """Manifest without its timing fields, for determinism comparisons."""
    out = dict(manifest)
    for key in TIMING_KEYS:
        out.pop(key, None)
    out.get("scalars", {}).pop("wall_time", None)
    return out

