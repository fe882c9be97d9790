"""Recovering line integrals of the nonlinearity from transmitted packets, and inverting them.

A level ``k`` of the leading profile rides a characteristic, so after a ray
has crossed the nonlinearity its phase has moved by ``d = k * int alpha``
while the zeros stay put.  Measuring ``d / k`` on every ray of a parallel
family samples the X-ray transform, which filtered backprojection inverts.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import lsqr

from .errors import (
    ConditioningError,
    DataError,
    DomainError,
    LevelError,
    ShapeError,
    WesterveltError,
)
from .harmonics import HarmonicSpectrum
from .nonlinearity import (
    MovedField,
    Ray,
    RigidMotion,
    ZeroField,
    line_integral,
    planar_rotation,
)
from .profile_core import PhaseProfile, evolve_profile, theta_grid

TWO_PI = 2.0 * math.pi
DEFAULT_LEVELS = (0.3, 0.5, 0.7, -0.3, -0.5, -0.7)
CONDITION_LIMIT = 1e6


class LinearizationWarning(UserWarning):
    """The second-harmonic estimate is outside its linearized regime."""


# -- demodulation ----------------------------------------------------------------


@dataclass(eq=False)
class Demodulation:
    profile: PhaseProfile
    spectrum: HarmonicSpectrum
    residual: float
    condition_number: float


def demodulate(phase, p, h, K=8, n_theta=1024, min_wavelengths=4.0, min_ppw=10.0):
    """Least-squares fit of ``p / h`` to ``sum_{|k| <= K} c_k e^{i k phase / h}``.

    Parameters
    ----------
    phase : array_like
        Phase ``phi = -t + x . omega`` at each sample.
    p : array_like
        Field samples.
    h : float
        Wavelength parameter.
    K : int
        Highest harmonic fitted.
    n_theta : int
        Grid of the synthesised profile.

    Raises
    ------
    ConditioningError
        When the window spans fewer than ``min_wavelengths`` wavelengths, the
        sampling is coarser than ``min_ppw`` points per wavelength, or the
        design matrix condition number exceeds ``1e6``.
    """
    phase = np.asarray(phase, dtype=float)
    y = np.asarray(p, dtype=float) / h
    if phase.shape != y.shape or phase.ndim != 1:
        raise DomainError("phase and p must be matching 1-D arrays")
    theta = phase / h
    span = (phase.max() - phase.min()) / (TWO_PI * h) if phase.size > 1 else 0.0
    ppw = (phase.size - 1) / span if span > 0 else 0.0
    k = np.arange(1, K + 1)
    A = np.hstack([np.ones((theta.size, 1)), np.cos(np.outer(theta, k)), np.sin(np.outer(theta, k))])
    cond = float(np.linalg.cond(A)) if A.shape[0] >= A.shape[1] else math.inf
    if span < min_wavelengths or ppw < min_ppw or cond > CONDITION_LIMIT:
        raise ConditioningError(
            f"demodulation design is unreliable: {span:.2f} wavelengths, {ppw:.1f} points per wavelength, "
            f"condition number {cond:.3g}",
            condition_number=cond,
        )
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    a, b = coef[1 : K + 1], coef[K + 1 :]
    u = np.zeros(2 * K + 1, dtype=complex)
    u[K] = coef[0]
    u[K + 1 :] = 0.5 * (a - 1j * b)
    u[:K] = np.conj(u[K + 1 :][::-1])
    spec = HarmonicSpectrum(u)
    th = theta_grid(n_theta)
    values = coef[0] + np.cos(np.outer(th, k)) @ a + np.sin(np.outer(th, k)) @ b
    return Demodulation(PhaseProfile(values), spec, resid, cond)


# -- tilt measurement -------------------------------------------------------------


@dataclass(frozen=True)
class TiltMeasurement:
    """Shift of level ``k``; ``integral = shift / level`` estimates ``int alpha`` on the ray."""

    level: float
    shift: float
    integral: float
    residual: float
    branch_shifts: tuple = ()
    ray_id: object = None


class _PeriodicSpline:
    """Periodic cubic spline of a profile with level crossings by bracketed bisection."""

    def __init__(self, profile):
        self.theta = profile.theta
        self.values = profile.values
        th = np.append(self.theta, TWO_PI)
        self.spline = CubicSpline(th, np.append(self.values, self.values[0]), bc_type="periodic")

    def __call__(self, t):
        return self.spline(np.mod(t, TWO_PI))

    def roots(self, level, tol=1e-13):
        """Crossings of ``level`` inside grid cells whose end values bracket it."""
        v = self.values - level
        nxt = np.roll(v, -1)
        idx = np.flatnonzero((v == 0) | (v * nxt < 0))
        d = self.theta[1] - self.theta[0]
        lo = self.theta[idx]
        hi = lo + d
        f_lo = v[idx]
        exact = f_lo == 0
        # safeguarded Newton inside each bracket, bisection when a step leaves it
        x = 0.5 * (lo + hi)
        deriv = self.spline.derivative()
        for _ in range(60):
            f = self.spline(x) - level
            left = np.sign(f) == np.sign(f_lo)
            lo = np.where(left, x, lo)
            f_lo = np.where(left, f, f_lo)
            hi = np.where(left, hi, x)
            with np.errstate(divide="ignore", invalid="ignore"):
                xn = x - f / deriv(x)
            bad = ~np.isfinite(xn) | (xn < lo) | (xn > hi)
            xn = np.where(bad, 0.5 * (lo + hi), xn)
            done = np.all(np.abs(xn - x) < tol)
            x = xn
            if done:
                break
        lo = hi = x
        r = np.where(exact, self.theta[idx], 0.5 * (lo + hi))
        return np.sort(np.mod(r, TWO_PI))


def _spline(profile):
    return _PeriodicSpline(profile)


def _roots(spline, level):
    return spline.roots(level)


def _cells(zeros):
    """Consecutive zero pairs ``(z_i, z_{i+1})`` with the last wrapping by 2 pi."""
    z = np.sort(zeros)
    return [(z[i], z[i + 1] if i + 1 < z.size else z[0] + TWO_PI) for i in range(z.size)]


def _in_cell(roots, a, b):
    r = np.concatenate([roots, roots + TWO_PI])
    return np.sort(r[(r > a) & (r < b)])


def profile_zeros(profile):
    return _roots(_spline(profile), 0.0)


def measure_tilt(profile, linear_ref, levels=None, ray_id=None):
    """Signed phase shifts of level sets relative to a linear reference.

    Within each cell between consecutive zeros of the reference, a level of
    the lobe's sign is crossed once on each monotone branch.  The crossing of
    the nonlinear profile on the same branch gives the shift; the two branch
    shifts are averaged.

    Parameters
    ----------
    profile, linear_ref : PhaseProfile
    levels : sequence of float, optional
        Defaults to ``(+-0.3, +-0.5, +-0.7) * max|linear_ref|``.

    Raises
    ------
    LevelError
        A level is not attained inside a cell.
    ShapeError
        A level is crossed more than once on a branch of the nonlinear profile.
    """
    amp = float(np.abs(linear_ref.values).max())
    if levels is None:
        levels = [c * amp for c in DEFAULT_LEVELS]
    s_nl, s_lin = _spline(profile), _spline(linear_ref)
    cells = _cells(_roots(s_lin, 0.0))
    if not cells:
        raise LevelError("linear reference has no zeros")
    out = []
    for k in levels:
        if k == 0:
            raise LevelError("level 0 carries no tilt (zeros are fixed)")
        r_nl, r_lin = _roots(s_nl, k), _roots(s_lin, k)
        shifts = []
        for a, b in cells:
            mid = 0.5 * (a + b)
            if np.sign(s_lin(mid)) != np.sign(k):
                continue
            lin = _in_cell(r_lin, a, b)
            nl = _in_cell(r_nl, a, b)
            if lin.size < 2 or nl.size < 2:
                raise LevelError(f"level {k:.4g} not attained on both branches of the cell ({a:.4f}, {b:.4f})")
            if nl.size > 2 or lin.size > 2:
                raise ShapeError(f"level {k:.4g} crossed {nl.size} times in one zero cell (near-shock data?)")
            shifts.extend(nl - lin)
        if not shifts:
            raise LevelError(f"no lobe of the reference has the sign of level {k:.4g}")
        shifts = np.array(shifts)
        d = float(shifts.mean())
        out.append(TiltMeasurement(float(k), d, d / k, float(np.ptp(shifts)), tuple(shifts), ray_id))
    return out


def recovered_integral(measurements):
    return float(np.mean([m.integral for m in measurements]))


def level_spread(measurements):
    v = np.array([m.integral for m in measurements])
    return float(np.ptp(v) / abs(v.mean())) if v.mean() != 0 else float(np.ptp(v))


@dataclass(frozen=True)
class PacketTilt:
    """Tilt read off a demodulated 1D packet against its linear twin."""

    measurements: tuple
    integral: float
    truth: float
    spread: float
    window: tuple
    profile: PhaseProfile
    linear_profile: PhaseProfile

    @property
    def relative_error(self):
        return abs(self.integral - self.truth) / abs(self.truth) if self.truth else math.nan


def packet_tilt(result, half_width=None, K=16, levels=None, wavelengths=4.2):
    """Recover ``int alpha`` from the forward packet of a 1D experiment.

    The window of ``wavelengths`` wavelengths (default just above the
    demodulation minimum) is centred on the packet centre ``c_0 + T``; the
    reference is the ``alpha = 0`` run.  ``truth`` is the quadrature integral
    of ``alpha`` along the characteristic through the window centre.
    """
    cfg = result.config
    if result.grid.dim != 1 or result.linear_terminal is None:
        raise DomainError("packet_tilt needs a 1D result with a linear reference run")
    w = float(np.asarray(cfg.direction, dtype=float)[0])
    h = cfg.h
    T = result.terminal.t
    c0 = cfg.envelope.longitudinal.center
    c_T = c0 + w * T
    hw = 0.5 * wavelengths * TWO_PI * h if half_width is None else half_width
    x = result.grid.axes()[0]
    win = np.abs(x - c_T) <= hw
    phase = -T + w * x[win]
    nl = demodulate(phase, result.terminal.values()[win], h, K)
    lin = demodulate(phase, result.linear_terminal.values()[win], h, K)
    meas = measure_tilt(nl.profile, lin.profile, levels)
    truth = line_integral(cfg.alpha, Ray(np.array([c0]), np.array([w])), 0.0, T)
    return PacketTilt(tuple(meas), recovered_integral(meas), truth, level_spread(meas), (c_T - hw, c_T + hw), nl.profile, lin.profile)


# -- second harmonic ------------------------------------------------------------


def xray_from_second_harmonic(spectrum, M):
    """Linearized ``int alpha`` from the ``sin 2 theta`` coefficient: ``2 (-2 Im u_2) / M^2``.

    Issues :class:`LinearizationWarning` when ``|estimate| * M > 0.3``.
    """
    if M == 0:
        raise DomainError("M must be non-zero")
    est = 2.0 * spectrum.sin_coefficient(2) / (M * M)
    if abs(est * M) > 0.3:
        warnings.warn(
            f"second-harmonic estimate {est:.4g} with M = {M} is outside the linearized regime",
            LinearizationWarning,
            stacklevel=2,
        )
    return est


# -- sinograms ---------------------------------------------------------------------


def ray_geometry(angle, offset):
    """Unit normal ``n`` and direction ``omega`` of the line ``{offset n + t omega}``."""
    n = np.array([math.cos(angle), math.sin(angle)])
    w = np.array([-math.sin(angle), math.cos(angle)])
    return n, w


def acquisition_angles(n_angles):
    return math.pi * np.arange(n_angles) / n_angles


def acquisition_offsets(n_offsets, half_width=1.0):
    d = 2.0 * half_width / n_offsets
    return -half_width + d * (np.arange(n_offsets) + 0.5)


@dataclass(eq=False)
class Sinogram:
    """Line-integral samples ``values[i, j]`` for angle ``angles[i]`` and offset ``offsets[j]``."""

    angles: np.ndarray
    offsets: np.ndarray
    values: np.ndarray
    mask: np.ndarray | None = None
    truth: np.ndarray | None = None
    mode: str = "exact"
    failures: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float)
        self.offsets = np.asarray(self.offsets, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.angles.size, self.offsets.size):
            raise DataError("sinogram values must have shape (n_angles, n_offsets)")
        if self.mask is None:
            self.mask = np.isfinite(self.values)
        self.mask = np.asarray(self.mask, dtype=bool)

    @property
    def shape(self):
        return self.values.shape

    def filled(self):
        """Values with masked rays replaced by 0."""
        return np.where(self.mask, self.values, 0.0)

    def moment0(self):
        """``int g(angle, s) ds`` per angle (midpoint rule)."""
        ds = self.offsets[1] - self.offsets[0] if self.offsets.size > 1 else 1.0
        return self.filled().sum(axis=1) * ds

    def coverage(self, radius):
        """Fraction of the ``(angle, offset)`` rays through ``B(0, radius)`` that are valid."""
        inside = np.abs(self.offsets)[None, :] < radius
        hit = np.broadcast_to(inside, self.shape)
        return float(self.mask[hit].mean()) if hit.any() else 1.0

    def scaled(self, a):
        return Sinogram(self.angles, self.offsets, a * self.values, self.mask.copy(), self.truth, self.mode)

    def max_error(self):
        if self.truth is None:
            return math.nan
        return float(np.abs(self.values - self.truth)[self.mask].max())


@dataclass(frozen=True)
class ProfileAcquisition:
    """Profile-mode settings: evolve the leading profile along each ray and measure tilts."""

    amplitude: float = 1.0
    n_theta: int = 1024
    levels: tuple | None = None


@dataclass(frozen=True)
class FdtdAcquisition:
    """fdtd-mode settings.

    Each angle is one 2D run with the phantom rotated to ``alpha(B x)`` and a
    wide plateau beam moving along ``+x_2``; column ``x_1 = s`` then carries
    the ray ``(angle, s)``.
    """

    h: float = 0.05
    ppw: float = 160.0
    transverse_spacing: float = 0.025
    radius: float = 1.2
    amplitude: float = 1.0
    longitudinal_half_width: float = 0.8
    longitudinal_edge: float = 0.04
    window_half_width: float = 0.65
    margin: float = 0.3
    K: int = 24
    cfl: float = 0.4
    b0: float = 0.5
    levels: tuple | None = None


def _profile_ray(args):
    alpha, angle, offset, acq, radius = args
    n, w = ray_geometry(angle, offset)
    ray = Ray(offset * n - radius * w, w)
    prof = evolve_profile(alpha, ray, acq.amplitude, 2 * radius, acq.n_theta)
    ref = PhaseProfile.cosine(acq.amplitude, acq.n_theta)
    meas = measure_tilt(prof, ref, acq.levels)
    return recovered_integral(meas)


def _exact_ray(args):
    alpha, angle, offset = args
    n, w = ray_geometry(angle, offset)
    return line_integral(alpha, Ray(offset * n, w))


def _map(func, jobs, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(func, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [func(j) for j in jobs]


class _Guarded:
    def __init__(self, func):
        self.func = func

    def __call__(self, job):
        try:
            return self.func(job), None
        except WesterveltError as exc:
            return math.nan, f"{type(exc).__name__}: {exc}"


def fdtd_beam_config(acq, offsets, alpha=None):
    """2D FDTD config shared by every angle of an fdtd-mode acquisition.

    The beam is uniform across ``x_1`` on a periodic strip, so no beam edges
    diffract into the measured columns; the strip is padded so the rotated
    field is negligible where it wraps.
    """
    from .fdtd import FDTDConfig
    from .linear_go import BeamEnvelope, ConstantProfile, PlateauProfile

    h = acq.h
    lw = acq.longitudinal_half_width + 5.1 * acq.longitudinal_edge
    c0 = -(acq.radius + lw + 0.05)
    # back of the demodulation window must clear the support at T
    T = (acq.radius + acq.window_half_width + 0.05) - c0
    dy = TWO_PI * h / acq.ppw
    ds = offsets[1] - offsets[0] if len(offsets) > 1 else acq.transverse_spacing
    m = max(1, int(math.ceil(ds / acq.transverse_spacing - 1e-9)))
    dx = ds / m
    n_side = int(math.ceil((acq.radius + acq.margin - abs(offsets[0])) / dx))
    x_lo = offsets[0] - n_side * dx
    x_hi = offsets[-1] + (n_side - 1) * dx  # periodic: x_hi + dx wraps to x_lo
    env = BeamEnvelope(
        PlateauProfile(c0, acq.longitudinal_half_width, acq.longitudinal_edge, acq.amplitude),
        (ConstantProfile(1.0),),
    )
    return FDTDConfig(
        alpha=ZeroField(dim=2) if alpha is None else alpha,
        envelope=env,
        direction=(0.0, 1.0),
        h=h,
        T=T,
        lower=(x_lo, c0 - lw - acq.margin),
        upper=(x_hi + 0.25 * dx, c0 + T + lw + acq.margin),
        spacing=(dx, dy),
        cfl=acq.cfl,
        b0=acq.b0,
        boundary=("periodic", "mur"),
        start="forward",
        t0=0.0,
        linear_reference=False,
        name="tomography-beam",
    )


def _column_profiles(result, offsets, acq):
    """Demodulated exit profiles on each column ``x_1 = offset``."""
    g = result.grid
    xs, ys = g.axes()
    p = result.terminal.values()
    T = result.terminal.t
    c_T = result.config.envelope.longitudinal.center + T
    win = np.abs(ys - c_T) <= acq.window_half_width
    phase = -T + ys[win]
    out = []
    for s in offsets:
        i = int(round((s - xs[0]) / g.spacing[0]))
        if abs(xs[i] - s) > 1e-9:
            raise DomainError("offset does not sit on a grid column")
        out.append(demodulate(phase, p[i, win], acq.h, acq.K))
    return out


def _fdtd_angle(args):
    alpha, angle, offsets, acq, ref_profiles = args
    from .fdtd import run_experiment

    moved = MovedField(alpha, RigidMotion(np.zeros(1), planar_rotation(angle)))
    cfg = fdtd_beam_config(acq, offsets, moved)
    res = run_experiment(cfg, check=False)
    vals, fails, spreads = [], [], []
    for j, dm in enumerate(_column_profiles(res, offsets, acq)):
        try:
            meas = measure_tilt(dm.profile, ref_profiles[j], acq.levels)
            vals.append(recovered_integral(meas))
            spreads.append(level_spread(meas))
            fails.append(None)
        except WesterveltError as exc:
            vals.append(math.nan)
            spreads.append(math.nan)
            fails.append(f"{type(exc).__name__}: {exc}")
    return vals, fails, spreads


def _strong_ray_spread(spreads, values, reduce, fraction=0.1):
    """Reduce the level spreads of rays whose value is at least ``fraction`` of the peak."""
    finite = np.isfinite(values)
    if not finite.any():
        return math.nan
    strong = finite & (np.abs(values) >= fraction * np.abs(values[finite]).max())
    return float(reduce(spreads[strong])) if np.isfinite(spreads[strong]).any() else math.nan


def assemble_sinogram(
    alpha,
    n_angles,
    n_offsets,
    mode="exact",
    half_width=1.0,
    radius=None,
    profile=ProfileAcquisition(),
    fdtd=FdtdAcquisition(),
    workers=None,
    truth=True,
):
    """Parallel-beam sinogram over ``n_angles`` angles in ``[0, pi)`` and cell-centred offsets.

    Parameters
    ----------
    alpha : NonlinearityField
        2D field.
    mode : {"exact", "profile", "fdtd"}
        ``exact`` integrates along each ray; ``profile`` evolves the leading
        profile and measures tilts; ``fdtd`` runs the direct solver once per
        angle and demodulates each column.
    half_width : float
        Offsets span ``[-half_width, half_width]``.
    radius : float, optional
        Start/stop radius for profile-mode rays (default: support radius).
    workers : int, optional
        Process count for independent rays or angles; output order is fixed.
    truth : bool
        Also store the exact sinogram for error reporting.

    Returns
    -------
    Sinogram
        Failed rays are masked and their messages kept in ``failures``.
    """
    if alpha.dim != 2:
        raise DomainError("sinograms are implemented for 2D fields")
    if n_angles < 1 or n_offsets < 1:
        raise DomainError("need at least one angle and one offset")
    angles = acquisition_angles(n_angles)
    offsets = acquisition_offsets(n_offsets, half_width)
    grid = [(a, s) for a in angles for s in offsets]
    exact = None
    if mode == "exact" or truth:
        exact = np.array(_map(_exact_ray, [(alpha, a, s) for a, s in grid], workers)).reshape(n_angles, n_offsets)
    failures = {}
    meta = {}
    if mode == "exact":
        values = exact.copy()
    elif mode == "profile":
        R = alpha.support_radius if radius is None else radius
        if not math.isfinite(R):
            raise DomainError("profile mode needs a finite start radius")
        res = _map(_Guarded(_profile_ray), [(alpha, a, s, profile, R) for a, s in grid], workers)
        values = np.array([v for v, _ in res]).reshape(n_angles, n_offsets)
        for idx, (_, msg) in enumerate(res):
            if msg:
                failures[(idx // n_offsets, idx % n_offsets)] = msg
    elif mode == "fdtd":
        from .fdtd import run_experiment

        ref_cfg = fdtd_beam_config(fdtd, offsets)
        ref = run_experiment(ref_cfg, check=False)
        ref_profiles = [d.profile for d in _column_profiles(ref, offsets, fdtd)]
        jobs = [(alpha, a, offsets, fdtd, ref_profiles) for a in angles]
        res = _map(_fdtd_angle, jobs, workers)
        values = np.array([r[0] for r in res])
        spreads = np.array([r[2] for r in res])
        for i, r in enumerate(res):
            for j, msg in enumerate(r[1]):
                if msg:
                    failures[(i, j)] = msg
        meta = {
            "h": fdtd.h,
            "grid_shape": list(ref.grid.shape),
            "T": ref_cfg.T,
            # relative spread is meaningless where the integral is ~0, so summarise strong rays only
            "level_spread_max": _strong_ray_spread(spreads, values, np.nanmax),
            "level_spread_median": _strong_ray_spread(spreads, values, np.nanmedian),
            "level_spread": spreads.tolist(),
        }
    else:
        raise DomainError(f"unknown sinogram mode {mode!r}")
    mask = np.isfinite(values)
    return Sinogram(angles, offsets, values, mask, exact if truth else None, mode, failures, meta)


# -- reconstruction ------------------------------------------------------------------


def ramp_kernel(n, ds):
    """Discrete band-limited ramp filter taps for lags ``-n..n``."""
    lag = np.arange(-n, n + 1)
    h = np.zeros(lag.size)
    h[lag == 0] = 1.0 / (4.0 * ds * ds)
    odd = lag % 2 == 1
    h[odd] = -1.0 / (math.pi**2 * lag[odd] ** 2 * ds * ds)
    return h


def filter_projections(values, ds, cutoff=1.0, window="hann"):
    """Ramp-filter each row, apodised by a Hann window reaching zero at ``cutoff`` times Nyquist."""
    n_a, n = values.shape
    P = 1 << int(math.ceil(math.log2(4 * n)))
    taps = ramp_kernel(n, ds)
    hk = np.zeros(P)
    hk[: n + 1] = taps[n:]
    hk[-n:] = taps[:n]
    H = np.real(np.fft.fft(hk))
    f = np.abs(np.fft.fftfreq(P))  # cycles per sample, Nyquist 0.5
    fc = 0.5 * cutoff
    if window == "hann":
        W = np.where(f <= fc, 0.5 * (1.0 + np.cos(math.pi * f / fc)), 0.0)
    elif window in (None, "none", "ramlak"):
        W = (f <= fc).astype(float)
    else:
        raise DomainError(f"unknown filter window {window!r}")
    G = np.fft.fft(values, P, axis=1)
    return np.real(np.fft.ifft(G * (H * W)[None, :], axis=1))[:, :n] * ds


def image_axes(n, half_width=1.0):
    d = 2.0 * half_width / n
    return -half_width + d * (np.arange(n) + 0.5)


@dataclass(eq=False)
class Reconstruction:
    """Image ``values[i, j]`` at ``(axis[i], axis[j])`` (first index is ``x_1``)."""

    values: np.ndarray
    axis: np.ndarray
    method: str
    truth: np.ndarray | None = None

    @property
    def rmse(self):
        if self.truth is None:
            return math.nan
        return float(np.sqrt(np.mean((self.values - self.truth) ** 2)))

    @property
    def relative_rmse(self):
        """RMSE over the peak of the ground truth."""
        peak = math.nan if self.truth is None else float(np.abs(self.truth).max())
        return self.rmse / peak if peak > 0 else math.nan

    def centroid(self, threshold=0.5):
        v = np.where(self.values >= threshold * self.values.max(), self.values, 0.0)
        X, Y = np.meshgrid(self.axis, self.axis, indexing="ij")
        return np.array([np.sum(X * v), np.sum(Y * v)]) / v.sum()


def backproject(filtered, angles, offsets, axis):
    """``(pi / N) sum_i q_i(x . n_i)`` with linear interpolation (zero outside the offsets)."""
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    out = np.zeros(X.shape)
    for a, q in zip(angles, filtered):
        s = X * math.cos(a) + Y * math.sin(a)
        out += np.interp(s, offsets, q, left=0.0, right=0.0)
    return out * math.pi / len(angles)


def system_matrix(angles, offsets, axis, step=None):
    """Sparse ray-by-pixel matrix from bilinear sampling along each line."""
    d = axis[1] - axis[0]
    step = 0.5 * d if step is None else step
    n = axis.size
    L = abs(axis[0]) + d
    t = np.arange(-L * math.sqrt(2), L * math.sqrt(2) + step, step)
    rows, cols, vals = [], [], []
    for ia, a in enumerate(angles):
        nrm, w = ray_geometry(a, 0.0)
        for js, s in enumerate(offsets):
            pts = s * nrm[None, :] + t[:, None] * w[None, :]
            fi = (pts - axis[0]) / d
            i0 = np.floor(fi).astype(int)
            fr = fi - i0
            r = ia * len(offsets) + js
            for di in (0, 1):
                for dj in (0, 1):
                    ii, jj = i0[:, 0] + di, i0[:, 1] + dj
                    wgt = (fr[:, 0] if di else 1 - fr[:, 0]) * (fr[:, 1] if dj else 1 - fr[:, 1]) * step
                    ok = (ii >= 0) & (ii < n) & (jj >= 0) & (jj < n) & (wgt > 0)
                    rows.append(np.full(ok.sum(), r))
                    cols.append(ii[ok] * n + jj[ok])
                    vals.append(wgt[ok])
    A = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(angles) * len(offsets), n * n),
    )
    A.sum_duplicates()
    return A


def reconstruct(sino, n=128, half_width=None, method="fbp", cutoff=1.0, window="hann", damp=1e-2, truth=None):
    """Invert a parallel-beam sinogram on an ``n x n`` grid.

    Parameters
    ----------
    sino : Sinogram
    n : int
        Image size.
    half_width : float, optional
        Image covers ``[-half_width, half_width]^2``; defaults to the offset range.
    method : {"fbp", "ridge"}
        Filtered backprojection, or damped least squares on the pixel basis
        (useful for few-angle data).
    cutoff : float
        Filter cutoff as a fraction of the Nyquist frequency.
    damp : float
        Ridge damping passed to LSQR.
    truth : NonlinearityField or ndarray, optional
        Ground truth for error reporting.

    Raises
    ------
    DataError
        For fewer than two angles, fewer than two offsets, or no valid rays.
    """
    if sino.angles.size < 2 or sino.offsets.size < 2:
        raise DataError("reconstruction needs at least two angles and two offsets")
    if not sino.mask.any():
        raise DataError("sinogram has no valid rays")
    ds = sino.offsets[1] - sino.offsets[0]
    if half_width is None:
        half_width = float(abs(sino.offsets[0]) + 0.5 * ds)
    axis = image_axes(n, half_width)
    if method == "fbp":
        q = filter_projections(sino.filled(), ds, cutoff, window)
        img = backproject(q, sino.angles, sino.offsets, axis)
    elif method == "ridge":
        A = system_matrix(sino.angles, sino.offsets, axis)
        keep = sino.mask.reshape(-1)
        sol = lsqr(A[keep], sino.values.reshape(-1)[keep], damp=damp, atol=1e-10, btol=1e-10, iter_lim=2000)
        img = sol[0].reshape(n, n)
    else:
        raise DomainError(f"unknown reconstruction method {method!r}")
    tr = None
    if truth is not None:
        if isinstance(truth, np.ndarray):
            tr = truth
        else:
            X, Y = np.meshgrid(axis, axis, indexing="ij")
            tr = truth.evaluate(np.stack([X, Y], axis=-1))
    return Reconstruction(img, axis, method, tr)
