"""Command-line orchestration.

Every run writes into its own directory: artifact files plus ``manifest.json``.
Exit codes: 0 ok, 2 config error, 3 numerical guard, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import io
from .config import (
    PRESETS,
    build_acquisition,
    build_fdtd_config,
    build_field,
    load_config,
    preset,
)
from .errors import ConfigError, NumericalGuardError, WesterveltError

EXIT_OK, EXIT_CONFIG, EXIT_GUARD, EXIT_IO = 0, 2, 3, 4
OUTPUT_ENV = "WESTERVELT_OUTPUT_ROOT"


def output_dir(cfg, override=None):
    if override:
        return Path(override)
    if cfg.get("output"):
        return Path(cfg["output"])
    root = Path(os.environ.get(OUTPUT_ENV, "runs"))
    return root / cfg.get("name", cfg["mode"])


# -- pipelines -----------------------------------------------------------------------


def run_profile(cfg, out):
    from .harmonics import evolve_spectrum, spectrum_to_profile
    from .nonlinearity import Ray, shock_parameter
    from .profile_core import PhaseProfile, evolve_profile, solve_implicit
    from .tomography import level_spread, measure_tilt, recovered_integral, xray_from_second_harmonic

    p = cfg["profile"]
    n_theta = p.get("n_theta", 1024)
    K = p.get("K", 32)
    levels = p.get("levels")
    rays = []
    artifacts = []
    for i, r in enumerate(p["rays"]):
        dim = len(r["base"])
        alpha = build_field(cfg["field"], dim=dim, seed=cfg.get("seed", 0))
        w = np.asarray(r["direction"], dtype=float)
        ray = Ray(np.asarray(r["base"], dtype=float), w / np.linalg.norm(w))
        M = r.get("amplitude", p.get("amplitude", 1.0))
        prof = evolve_profile(alpha, ray, M, r["length"], n_theta)
        ref = PhaseProfile.cosine(M, n_theta)
        meas = measure_tilt(prof, ref, levels, ray_id=i)
        spec = evolve_spectrum(M, prof.s_tilde, K)
        spec_err = float(np.abs(spectrum_to_profile(spec, n_theta).values - solve_implicit(M, prof.s_tilde, prof.theta)).max())
        stem = out / f"ray{i:03d}"
        artifacts.append(io.write_profile(stem, prof))
        artifacts.append(io.write_spectrum(out / f"ray{i:03d}_spectrum.json", spec))
        artifacts.append(
            io.write_csv(
                out / f"ray{i:03d}_tilts.csv",
                ["level", "shift", "integral", "residual"],
                [[m.level for m in meas], [m.shift for m in meas], [m.integral for m in meas], [m.residual for m in meas]],
            )
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            harm = xray_from_second_harmonic(spec, M)
        rays.append(
            {
                "ray": i,
                "M": M,
                "s_tilde": prof.s_tilde,
                "recovered_integral": recovered_integral(meas),
                "tilt_error": abs(recovered_integral(meas) - prof.s_tilde),
                "level_spread": level_spread(meas),
                "second_harmonic_estimate": harm,
                "spectrum_vs_implicit": spec_err,
                "shock_parameter": shock_parameter(alpha, ray, M),
            }
        )
    return {"rays": rays}, artifacts


def run_fdtd(cfg, out):
    from .fdtd import leading_order_field, precheck, run_experiment
    from .linear_go import two_term_field
    from .tomography import packet_tilt

    fc = build_fdtd_config(cfg)
    if not fc.allow_shock:
        precheck(fc)
    res = run_experiment(fc)
    g = res.grid
    artifacts = []
    lin = res.linear_terminal.values() if res.linear_terminal is not None else None
    artifacts.append(io.write_snapshot(out / "terminal", g, res.terminal.values(), res.terminal.t, lin))
    for k, (t_snap, p_snap) in enumerate(res.snapshots):
        lin_s = res.linear_snapshots[k][1] if res.linear_snapshots else None
        artifacts.append(io.write_snapshot(out / f"snapshot{k:03d}", g, p_snap, t_snap, lin_s))
    scalars = {
        "h": fc.h,
        "T": res.terminal.t,
        "grid_shape": list(g.shape),
        "dt": res.terminal.dt,
        "steps": res.terminal.steps,
        "precheck": res.precheck,
        "sup_p": float(np.abs(res.terminal.values()).max()),
    }
    w = np.asarray(fc.direction, dtype=float)
    if g.dim == 1:
        x = g.axes()[0]
        fwd = x * w[0] > (fc.envelope.longitudinal.center * w[0] + 0.5 * res.terminal.t)
        p_star = leading_order_field(fc, res.terminal.t)
        err = float(np.abs(res.terminal.values() - p_star)[fwd].max())
        scalars["remainder_sup_vs_hU0"] = err
        scalars["remainder_over_h2"] = err / fc.h**2
        if lin is not None:
            go = two_term_field(fc.envelope, w, fc.h, res.terminal.t, x[:, None], packets="both" if fc.start == "cauchy" else "plus")
            scalars["linear_vs_two_term_go"] = float(np.abs(lin - go)[fwd].max())
            try:
                tilt = packet_tilt(res)
            except WesterveltError as exc:
                scalars["tilt_failure"] = f"{type(exc).__name__}: {exc}"
            else:
                scalars.update(
                    recovered_integral=tilt.integral,
                    quadrature_integral=tilt.truth,
                    tilt_relative_error=tilt.relative_error,
                    level_spread=tilt.spread,
                    window=list(tilt.window),
                    tilts=[{"level": m.level, "shift": m.shift, "integral": m.integral} for m in tilt.measurements],
                )
                artifacts.append(io.write_profile(out / "packet_profile", tilt.profile))
                artifacts.append(io.write_profile(out / "packet_linear_profile", tilt.linear_profile))
                crest_nl = tilt.profile.theta[np.argmax(tilt.profile.values)]
                crest_lin = tilt.linear_profile.theta[np.argmax(tilt.linear_profile.values)]
                scalars["crest_lead"] = float((crest_nl - crest_lin + math.pi) % (2 * math.pi) - math.pi)
    elif lin is not None:
        diff = np.abs(res.difference)
        i, j = np.unravel_index(np.argmax(diff), diff.shape)
        xs, ys = g.axes()
        scalars["difference_argmax"] = [float(xs[i]), float(ys[j])]
        scalars["difference_max"] = float(diff[i, j])
    return scalars, artifacts


def _truth_image_field(cfg):
    if "field" not in cfg:
        return None
    return build_field(cfg["field"], dim=2, seed=cfg.get("seed", 0))


def _reconstruction_scalars(sino, cfg, alpha, out, artifacts):
    from .tomography import reconstruct

    r = cfg.get("reconstruction", {})
    rec = reconstruct(
        sino,
        n=r.get("n", 128),
        half_width=r.get("half_width"),
        method=r.get("method", "fbp"),
        cutoff=r.get("cutoff", 1.0),
        window=r.get("window", "hann"),
        damp=r.get("damp", 1e-2),
        truth=alpha,
    )
    artifacts.append(io.write_image(out / "image", rec))
    return {"rmse": rec.rmse, "relative_rmse": rec.relative_rmse, "image_n": int(rec.values.shape[0]), "method": rec.method}


def run_sinogram(cfg, out):
    from .tomography import assemble_sinogram

    alpha = build_field(cfg["field"], dim=2, seed=cfg.get("seed", 0))
    mode, n_angles, n_offsets, kw = build_acquisition(cfg)
    sino = assemble_sinogram(alpha, n_angles, n_offsets, mode, **kw)
    artifacts = [io.write_sinogram(out / "sinogram", sino, {"field": cfg["field"], "seed": cfg.get("seed", 0)})]
    peak = float(np.abs(sino.truth).max()) if sino.truth is not None else math.nan
    m0 = sino.moment0()
    scalars = {
        "mode": mode,
        "shape": list(sino.shape),
        "max_error": sino.max_error(),
        "max_error_over_peak": sino.max_error() / peak if peak else math.nan,
        "masked_rays": int((~sino.mask).sum()),
        "coverage": sino.coverage(kw["half_width"]),
        "moment0_spread": float(np.ptp(m0) / abs(m0.mean())) if m0.mean() else math.nan,
        "recovered_integral": sino.values,
        "meta": {k: v for k, v in sino.meta.items() if k != "level_spread"},
    }
    if "reconstruction" in cfg:
        scalars["reconstruction"] = _reconstruction_scalars(sino, cfg, alpha, out, artifacts)
    return scalars, artifacts


def run_reconstruct(cfg, out):
    src = Path(cfg["reconstruction"]["sinogram"])
    stem = src / "sinogram" if src.is_dir() else src.with_suffix("")
    sino, header = io.read_sinogram(stem)
    alpha = build_field(header["field"], dim=2, seed=header.get("seed", 0)) if header.get("field") else _truth_image_field(cfg)
    artifacts = []
    scalars = _reconstruction_scalars(sino, cfg, alpha, out, artifacts)
    scalars["sinogram"] = str(stem)
    return scalars, artifacts


def run_validate(cfg, out):
    from .validate import format_table, run_suite

    results = run_suite(quick=cfg.get("validate", {}).get("quick", False))
    print(format_table(results))
    rows = [{"name": r.name, "passed": r.passed, "value": r.value, "tolerance": r.tolerance} for r in results]
    path = io.write_json(out / "invariants.json", rows)
    status = "ok" if all(r.passed for r in results) else "failed"
    return {"invariants": rows, "all_passed": status == "ok"}, [path]


PIPELINES = {
    "profile": run_profile,
    "fdtd": run_fdtd,
    "sinogram": run_sinogram,
    "reconstruct": run_reconstruct,
    "validate": run_validate,
}


def run(cfg, out=None):
    """Validate ``cfg``, run its pipeline and write the manifest; return ``(exit_code, manifest_path)``."""
    cfg = load_config(cfg)
    out = output_dir(cfg, out)
    out.mkdir(parents=True, exist_ok=True)
    tic = time.perf_counter()
    scalars, artifacts = PIPELINES[cfg["mode"]](cfg, out)
    status = "ok"
    if cfg["mode"] == "validate" and not scalars["all_passed"]:
        status = "failed"
    path = io.write_manifest(out, cfg, scalars, artifacts, time.perf_counter() - tic, status)
    return (EXIT_OK if status == "ok" else 1), path


# -- plot data -----------------------------------------------------------------------


def emit_plot_data(run_dir, dest=None):
    """Write tidy CSV bundles for the artifacts of ``run_dir``; return their paths."""
    run_dir = Path(run_dir)
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.exists():
        raise FileNotFoundError(f"{manifest_path}: no manifest (is this a run directory?)")
    manifest = io.read_json(manifest_path)
    dest = Path(dest) if dest else run_dir / "plots"
    mode = manifest["config"]["mode"]
    written = []
    if mode == "fdtd":
        values, header = io.read_grid(run_dir / "terminal")
        if len(header["shape"]) == 1:
            data = io.read_csv(run_dir / "terminal.csv")
            lin = data.get("p_linear", np.full_like(data["p"], np.nan))
            written.append(io.write_csv(dest / "terminal.csv", ["x", "p_nonlinear", "p_linear"], [data["x"], data["p"], lin]))
        else:
            xs = header["origin"][0] + header["spacing"][0] * np.arange(header["shape"][0])
            ys = header["origin"][1] + header["spacing"][1] * np.arange(header["shape"][1])
            X, Y = np.meshgrid(xs, ys, indexing="ij")
            cols = [X, Y, values]
            names = ["x1", "x2", "p_nonlinear"]
            if "p_linear" in header["files"]:
                lin = io.read_grid(run_dir / "terminal", "p_linear")[0]
                cols += [lin, values - lin]
                names += ["p_linear", "difference"]
            written.append(io.write_csv(dest / "terminal.csv", names, cols))
        if (run_dir / "packet_profile.csv").exists():
            written.append(
                _profile_bundle(
                    io.read_profile(run_dir / "packet_profile"),
                    io.read_profile(run_dir / "packet_linear_profile"),
                    manifest["scalars"].get("tilts", []),
                    dest / "profile_tilts.csv",
                )
            )
    elif mode == "profile":
        from .profile_core import PhaseProfile

        for r in manifest["scalars"]["rays"]:
            i = r["ray"]
            prof = io.read_profile(run_dir / f"ray{i:03d}")
            t = io.read_csv(run_dir / f"ray{i:03d}_tilts.csv")
            tilts = [{"level": k, "shift": d} for k, d in zip(t["level"], t["shift"])]
            ref = PhaseProfile.cosine(r["M"], prof.n_theta)
            written.append(_profile_bundle(prof, ref, tilts, dest / f"ray{i:03d}_profile_tilts.csv"))
    elif mode == "sinogram":
        data = io.read_csv(run_dir / "sinogram.csv")
        err = data["value"] - data["truth"]
        written.append(
            io.write_csv(
                dest / "sinogram.csv",
                ["angle", "offset", "value", "truth", "error"],
                [data["angle"], data["offset"], data["value"], data["truth"], err],
            )
        )
    if mode in ("sinogram", "reconstruct") and (run_dir / "image.json").exists():
        rec, _ = io.read_image(run_dir / "image")
        X, Y = np.meshgrid(rec.axis, rec.axis, indexing="ij")
        truth = rec.truth if rec.truth is not None else np.full(rec.values.shape, np.nan)
        written.append(io.write_csv(dest / "image.csv", ["x1", "x2", "value", "truth"], [X, Y, rec.values, truth]))
    if mode == "validate":
        rows = io.read_json(run_dir / "invariants.json")
        written.append(
            io.write_csv(
                dest / "invariants.csv",
                ["name", "passed", "value", "tolerance"],
                [[r["name"] for r in rows], [int(r["passed"]) for r in rows], [r["value"] for r in rows], [r["tolerance"] for r in rows]],
            )
        )
    return written


def _profile_bundle(prof, ref, tilts, path):
    """Rows ``(theta, U0, U0_linear, level, shift)``, one block per level."""
    th, u, ul = prof.theta, prof.values, ref.values
    cols = [[], [], [], [], []]
    for t in tilts or [{"level": math.nan, "shift": math.nan}]:
        cols[0].append(th)
        cols[1].append(u)
        cols[2].append(ul)
        cols[3].append(np.full(th.size, t["level"]))
        cols[4].append(np.full(th.size, t["shift"]))
    return io.write_csv(path, ["theta", "U0", "U0_linear", "level", "shift"], [np.concatenate(c) for c in cols])


# -- argument parsing ------------------------------------------------------------------


def _set(cfg, dotted, value):
    node = cfg
    keys = dotted.split(".")
    for k in keys[:-1]:
        node = node.setdefault(k, {})
    try:
        node[keys[-1]] = json.loads(value)
    except json.JSONDecodeError:
        node[keys[-1]] = value


def _base_config(args, mode, default_preset):
    if args.config:
        text = Path(args.config).read_text()
        try:
            cfg = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"$: invalid JSON in {args.config} ({exc.msg} at line {exc.lineno})", "$") from exc
    else:
        cfg = preset(args.preset or default_preset)
    if cfg.get("mode") != mode:
        raise ConfigError(f"$.mode: config is for {cfg.get('mode')!r}, not {mode!r}", "$.mode")
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected key=value", "$")
        _set(cfg, *item.split("=", 1))
    return cfg


def build_parser():
    ap = argparse.ArgumentParser(prog="westervelt", description="Weakly nonlinear Westervelt laboratory")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, default):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--preset", help=f"built-in config (default {default})")
        p.add_argument("--output", help=f"run directory (default ${OUTPUT_ENV}/<name>)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a dotted config entry (JSON value)")

    p = sub.add_parser("profile", help="evolve leading profiles along rays")
    common(p, "burgers-profile")
    p.add_argument("--n-theta", type=int)
    p.add_argument("--K", type=int)

    p = sub.add_parser("fdtd", help="direct Westervelt simulation")
    common(p, "westervelt-1d")
    p.add_argument("--h", type=float)
    p.add_argument("--dx", type=float, help="grid spacing on every axis")
    p.add_argument("--ppw", type=float, help="points per wavelength (alternative to --dx)")
    p.add_argument("--T", type=float)
    p.add_argument("--snapshot-every", type=float, help="snapshot cadence in time units")

    p = sub.add_parser("sinogram", help="assemble a sinogram (and reconstruct)")
    common(p, "tomography-profile")
    p.add_argument("--mode", choices=["exact", "profile", "fdtd"])
    p.add_argument("--angles", type=int)
    p.add_argument("--offsets", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--no-reconstruct", action="store_true")

    p = sub.add_parser("reconstruct", help="reconstruct alpha from a sinogram artifact")
    p.add_argument("sinogram", help="sinogram run directory or sinogram stem")
    p.add_argument("--output")
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--method", choices=["fbp", "ridge"], default="fbp")
    p.add_argument("--cutoff", type=float, default=1.0)
    p.add_argument("--window", choices=["hann", "none"], default="hann")
    p.add_argument("--damp", type=float, default=1e-2)

    p = sub.add_parser("validate", help="run the invariant suite")
    p.add_argument("--quick", action="store_true", help="core invariants only")
    p.add_argument("--output")

    p = sub.add_parser("emit-plots", help="tidy CSV bundles from a run directory")
    p.add_argument("run_dir")
    p.add_argument("--output")

    p = sub.add_parser("preset", help="list or dump built-in configs")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--dump", metavar="NAME")
    g.add_argument("--list", action="store_true")
    return ap


def config_from_args(args):
    """Assemble the config dict a subcommand will run."""
    cmd = args.command
    if cmd == "profile":
        cfg = _base_config(args, "profile", "burgers-profile")
        if args.n_theta:
            cfg["profile"]["n_theta"] = args.n_theta
        if args.K:
            cfg["profile"]["K"] = args.K
    elif cmd == "fdtd":
        cfg = _base_config(args, "fdtd", "westervelt-1d")
        if args.h:
            cfg["h"] = args.h
        if args.T:
            cfg["T"] = args.T
        if args.dx:
            cfg["grid"].pop("ppw", None)
            cfg["grid"]["spacing"] = [args.dx] * len(cfg["grid"]["lower"])
        elif args.ppw:
            cfg["grid"].pop("spacing", None)
            cfg["grid"]["ppw"] = args.ppw
        if args.snapshot_every:
            n = int(math.floor(cfg["T"] / args.snapshot_every + 1e-9))
            cfg.setdefault("solver", {})["snapshot_times"] = [args.snapshot_every * (k + 1) for k in range(n) if args.snapshot_every * (k + 1) < cfg["T"]]
    elif cmd == "sinogram":
        cfg = _base_config(args, "sinogram", "tomography-profile")
        acq = cfg.setdefault("acquisition", {})
        for key, val in (("mode", args.mode), ("n_angles", args.angles), ("n_offsets", args.offsets), ("workers", args.workers)):
            if val is not None:
                acq[key] = val
        if args.no_reconstruct:
            cfg.pop("reconstruction", None)
    elif cmd == "reconstruct":
        cfg = {
            "mode": "reconstruct",
            "name": "reconstruct",
            "reconstruction": {
                "sinogram": args.sinogram,
                "n": args.n,
                "method": args.method,
                "cutoff": args.cutoff,
                "window": args.window,
                "damp": args.damp,
            },
        }
    elif cmd == "validate":
        cfg = preset("validate")
        cfg["validate"]["quick"] = args.quick
    else:
        raise ConfigError(f"unknown command {cmd!r}", "$")
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "preset":
            if args.list:
                print("\n".join(sorted(PRESETS)))
            else:
                sys.stdout.write(io.dumps(preset(args.dump)))
            return EXIT_OK
        if args.command == "emit-plots":
            for path in emit_plot_data(args.run_dir, args.output):
                print(path)
            return EXIT_OK
        cfg = config_from_args(args)
        code, manifest = run(cfg, getattr(args, "output", None))
        print(manifest)
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalGuardError as exc:
        print(f"numerical guard: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except WesterveltError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

