"""Leading profile (inviscid Burgers on the circle) and the second profile term.

With ``s_tilde`` the accumulated nonlinearity along a ray the leading profile
solves ``U_s + U U_theta = 0`` with ``U(0) = M cos theta``.  Before the shock
at ``s_tilde = 1/M`` it is the unique root of

    F(u) = u - M cos(theta - u s_tilde) = 0,

and its characteristics are ``theta = q + M cos(q) s_tilde``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, EvaluationError, GeometryError, ShockError
from .nonlinearity import Ray, line_integral

TWO_PI = 2.0 * math.pi
DEFAULT_N_THETA = 1024
RESIDUAL_TOL = 1e-12


def theta_grid(n):
    """Uniform grid ``2 pi j / n`` on ``[0, 2 pi)``."""
    return TWO_PI * np.arange(n) / n


def fourier_interpolate(values, theta):
    """Evaluate the trigonometric interpolant of uniform samples at arbitrary ``theta``."""
    values = np.asarray(values, dtype=float)
    n = values.size
    c = np.fft.rfft(values) / n
    k = np.arange(c.size)
    w = np.full(c.size, 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0
    theta = np.asarray(theta, dtype=float)
    flat = theta.reshape(-1)
    out = np.empty(flat.size)
    coef = w * c
    chunk = max(1, 2**22 // max(k.size, 1))
    for i in range(0, flat.size, chunk):
        out[i : i + chunk] = np.real(np.exp(1j * np.multiply.outer(flat[i : i + chunk], k)) @ coef)
    return out.reshape(theta.shape)


def fourier_upsample(values, factor):
    """Trigonometric interpolant of uniform samples on a grid ``factor`` times denser."""
    values = np.asarray(values, dtype=float)
    if factor == 1:
        return values.copy()
    n = values.size
    c = np.fft.rfft(values)
    if n % 2 == 0:
        c[-1] *= 0.5  # split the Nyquist mode symmetrically
    m = n * factor
    padded = np.zeros(m // 2 + 1, dtype=complex)
    padded[: c.size] = c
    return np.fft.irfft(padded, m) * factor


def spectral_derivative(values, order=1):
    values = np.asarray(values, dtype=float)
    n = values.size
    k = np.fft.rfftfreq(n, 1.0 / n)
    mult = (1j * k) ** order
    if n % 2 == 0 and order % 2 == 1:
        mult[-1] = 0.0
    return np.fft.irfft(np.fft.rfft(values) * mult, n)


def spectral_antiderivative(values):
    """``int_0^theta f`` for a mean-zero periodic sample vector (the mean is dropped)."""
    values = np.asarray(values, dtype=float)
    n = values.size
    c = np.fft.rfft(values)
    k = np.fft.rfftfreq(n, 1.0 / n)
    out = np.zeros_like(c)
    out[1:] = c[1:] / (1j * k[1:])
    if n % 2 == 0:
        out[-1] = 0.0
    g = np.fft.irfft(out, n)
    return g - g[0]


@dataclass(eq=False)
class PhaseProfile:
    """Samples of a 2 pi-periodic profile on the uniform grid ``theta_grid(n)``."""

    values: np.ndarray
    M: float = math.nan
    s_tilde: float = math.nan
    s: float | None = None
    ray: Ray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 4:
            raise DomainError("profile values must be a 1-D array with at least 4 samples")

    @property
    def n_theta(self):
        return self.values.size

    @property
    def theta(self):
        return theta_grid(self.n_theta)

    def mean(self):
        return float(self.values.mean())

    def sup(self):
        return float(np.abs(self.values).max())

    def evaluate(self, theta):
        return fourier_interpolate(self.values, theta)

    @classmethod
    def cosine(cls, M, n_theta=DEFAULT_N_THETA):
        return cls(M * np.cos(theta_grid(n_theta)), M=M, s_tilde=0.0)

    def meta(self):
        out = {"M": self.M, "s_tilde": self.s_tilde, "n_theta": self.n_theta}
        if self.s is not None:
            out["s"] = self.s
        if self.ray is not None:
            out["ray"] = {"base": self.ray.base.tolist(), "direction": self.ray.direction.tolist()}
        return out


def _check_preshock(M, s_tilde):
    if abs(M * s_tilde) >= 1.0:
        raise ShockError(f"|M s_tilde| = {abs(M * s_tilde):.6g} >= 1: past the first shock", s_tilde=s_tilde)


def _newton(M, s_tilde, theta, max_iter=100):
    """Safeguarded Newton on ``F(u) = u - M cos(theta - u s)`` inside ``[-|M|, |M|]``."""
    theta = np.asarray(theta, dtype=float)
    a = np.full(theta.shape, -abs(M))
    b = np.full(theta.shape, abs(M))
    u = M * np.cos(theta)
    for _ in range(max_iter):
        arg = theta - u * s_tilde
        F = u - M * np.cos(arg)
        dF = 1.0 - M * s_tilde * np.sin(arg)
        a = np.where(F < 0, u, a)
        b = np.where(F > 0, u, b)
        if np.all(np.abs(F) <= 0.25 * RESIDUAL_TOL):
            break
        with np.errstate(divide="ignore", invalid="ignore"):
            un = u - F / dF
        bad = ~np.isfinite(un) | (un <= a) | (un >= b)
        u = np.where(bad, 0.5 * (a + b), un)
    F = u - M * np.cos(theta - u * s_tilde)
    return u, F


def solve_implicit(M, s_tilde, theta):
    """Leading profile value(s) ``U_0`` solving ``u = M cos(theta - u s_tilde)``.

    Parameters
    ----------
    M : float
        Initial amplitude.
    s_tilde : float
        Accumulated nonlinearity; requires ``|M s_tilde| < 1``.
    theta : float or array_like
        Phase; any real value (the profile is 2 pi-periodic).

    Returns
    -------
    float or ndarray
        Roots with residual below ``1e-12``.

    Raises
    ------
    ShockError
        If ``|M s_tilde| >= 1``.
    """
    _check_preshock(M, s_tilde)
    scalar = np.ndim(theta) == 0
    th = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    if M == 0:
        u = np.zeros(th.shape)
    else:
        u, F = _newton(M, s_tilde, th)
        if np.abs(F).max(initial=0.0) >= RESIDUAL_TOL:
            raise EvaluationError(f"implicit solve residual {np.abs(F).max():.3e} above {RESIDUAL_TOL}")
    return float(u) if scalar else u


def derivative_margin(M, s_tilde, n_theta=1024, n_u=257):
    """Minimum of ``F'(u) = 1 - M s sin(theta - u s)`` over the theta grid and the bracket.

    Positive margin means the Newton bracket holds a unique simple root for
    every theta; the margin reaches 0 exactly when ``|M s_tilde| = 1``.
    """
    th = theta_grid(n_theta)[:, None]
    u = np.linspace(-abs(M), abs(M), n_u)[None, :]
    return float(np.min(1.0 - M * s_tilde * np.sin(th - u * s_tilde)))


def shock_onset_probe(M, s_hi=None, tol=1e-9, n_theta=1024, n_u=257):
    """Bisect on ``s_tilde`` for the loss of sign-definiteness of ``F'``."""
    if M <= 0:
        raise DomainError("shock onset needs M > 0")
    lo, hi = 0.0, 4.0 / M if s_hi is None else s_hi
    if derivative_margin(M, hi, n_theta, n_u) > 0:
        raise DomainError("upper probe bound is still pre-shock")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if derivative_margin(M, mid, n_theta, n_u) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _periodic_pchip(x, y, period=TWO_PI, pad=8):
    xp = np.concatenate([x[-pad:] - period, x, x[:pad] + period])
    yp = np.concatenate([y[-pad:], y, y[:pad]])
    interp = PchipInterpolator(xp, yp, extrapolate=False)
    x0 = x[0]

    def f(t):
        return interp(x0 + np.mod(np.asarray(t, dtype=float) - x0, period))

    return f


@dataclass(eq=False)
class CharacteristicFan:
    """Characteristics ``theta_i = q_i + u_i s_tilde`` (unwrapped)."""

    seeds: np.ndarray
    values: np.ndarray
    s_tilde: float
    M: float = math.nan
    n_theta: int = DEFAULT_N_THETA

    @property
    def positions(self):
        return self.seeds + self.values * self.s_tilde

    def is_monotone(self):
        x = self.positions
        return bool(np.all(np.diff(x) > 0) and x[0] + TWO_PI > x[-1])

    def to_profile(self, n_theta=None):
        """Resample onto the uniform grid by periodic monotone cubic interpolation."""
        n = self.n_theta if n_theta is None else n_theta
        f = _periodic_pchip(self.positions, self.values)
        return PhaseProfile(f(theta_grid(n)), M=self.M, s_tilde=self.s_tilde)

def evolve_characteristics(initial, s_tilde, oversample=16):
    """Push a profile along its characteristics to accumulated nonlinearity ``s_tilde``.

    Seeds are ``oversample`` times denser than the profile grid; their
    values come from the trigonometric interpolant of ``initial``.

    Raises
    ------
    ShockError
        If the fan folds (positions lose monotonicity).
    """
    n = initial.n_theta
    q = theta_grid(n * oversample)
    u = fourier_upsample(initial.values, oversample)
    # characteristics cross once 1 + s_tilde * U'(q) reaches 0
    if np.min(1.0 + s_tilde * spectral_derivative(initial.values)) <= 0:
        raise ShockError(f"characteristics cross before s_tilde = {s_tilde}", s_tilde=s_tilde)
    fan = CharacteristicFan(q, u, float(s_tilde), M=initial.M, n_theta=n)
    if not fan.is_monotone():
        raise ShockError(f"characteristic fan folded at s_tilde = {s_tilde}", s_tilde=s_tilde)
    return fan


def evolve_profile(alpha, ray, M, s, n_theta=DEFAULT_N_THETA):
    """Leading profile after propagating a distance ``s`` along ``ray``."""
    if s < 0:
        raise DomainError("propagation parameter s must be non-negative")
    st = line_integral(alpha, ray, 0.0, s)
    values = solve_implicit(M, st, theta_grid(n_theta))
    return PhaseProfile(values, M=M, s_tilde=st, s=s, ray=ray)


# -- second profile term -------------------------------------------------------

Beta1 = Literal["zero", "zero_mean"]


def _gauss_legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass(eq=False)
class U1Result:
    """Second profile term at time ``T``: ``values[i, j] = U_1(T, points[i], theta_j)``."""

    points: np.ndarray
    values: np.ndarray
    T: float
    t0: float
    beta1: str = "zero"

    @property
    def theta(self):
        return theta_grid(self.values.shape[1])

    def profile(self, i):
        return PhaseProfile(self.values[i])


@dataclass(eq=False)
class _LeadingField:
    """``U_0(t, x, theta)`` for data ``chi(x - t_0 omega) cos theta`` handed off at ``t_0``."""

    alpha: object
    chi: object
    direction: np.ndarray
    t0: float
    n_quad: int = 48
    _nodes: tuple = field(init=False)

    def __post_init__(self):
        self._nodes = _gauss_legendre(self.n_quad)

    def s_tilde(self, t, x):
        # int_0^{t - t0} alpha(x - (t - t0) omega + sigma omega) d sigma, fixed rule keeps it smooth in (t, x)
        L = t - self.t0
        if L == 0:
            return 0.0
        xg, wg = self._nodes
        pts = x[None, :] + (xg[:, None] - 1.0) * L * self.direction[None, :]
        return float(L * np.dot(wg, self.alpha.evaluate(pts)))

    def amplitude(self, t, x):
        return float(self.chi((x - t * self.direction)[None, :])[0])

    def values(self, t, x, theta):
        M = self.amplitude(t, x)
        st = self.s_tilde(t, x)
        return solve_implicit(M, st, theta), M, st


def solve_U1(
    alpha,
    chi,
    direction,
    t0,
    T,
    points,
    n_theta=256,
    steps=64,
    fd_step=1e-3,
    beta1: Beta1 = "zero",
    box=None,
):
    """Second profile term by integrating its transport equation along characteristics.

    The transport field is ``X = d_t + omega . grad + alpha U_0 d_theta``;
    along an integral curve ``x(t) = x_T - (T - t) omega`` and the leading
    profile value is constant, so each curve is a Burgers characteristic
    with phase ``theta(t) = q + U_0 s_tilde(t)``.  On it

        dU_1/dt = -alpha (d_theta U_0) U_1 + 1/2 int_0^theta Box U_0 + alpha d_t (U_0^2) + beta_1,

    integrated by classical RK4 with ``steps`` uniform steps from the handoff
    data ``U_1(t_0) = i a_{+,1} sin theta``.  ``Box U_0`` and ``d_t U_0^2`` use
    centred differences of step ``fd_step``.

    Parameters
    ----------
    alpha : NonlinearityField
    chi : Envelope
        Beam envelope; the leading amplitude at ``(t, x)`` is ``chi(x - t omega)``.
    direction : array_like
        Unit propagation direction ``omega``.
    t0, T : float
        Handoff and final times, ``t0 <= T``.
    points : array_like, shape (m, n)
        Evaluation points at time ``T``.
    n_theta : int
        Size of the theta grid.
    steps : int
        RK4 steps over ``[t0, T]``.
    fd_step : float
        Finite-difference step for ``Box U_0`` and ``d_t U_0^2``.
    beta1 : {"zero", "zero_mean"}
        ``"zero"`` sets the free function to 0.  ``"zero_mean"`` picks it so the
        theta-mean of the source vanishes, which conserves the mean of ``U_1``.
    box : (lower, upper), optional
        Computational box; any stencil point outside raises ``GeometryError``.

    Returns
    -------
    U1Result
    """
    from .linear_go import first_corrector

    w = np.atleast_1d(np.asarray(direction, dtype=float))
    n = w.size
    pts = np.asarray(points, dtype=float).reshape(-1, n)
    if T < t0:
        raise DomainError("solve_U1 needs T >= t0")
    if beta1 not in ("zero", "zero_mean"):
        raise DomainError(f"unknown beta1 choice {beta1!r}")
    lead = _LeadingField(alpha, chi, w, t0)
    th_grid = theta_grid(n_theta)
    times = np.linspace(t0, T, 2 * steps + 1)  # nodes and midpoints
    dt = (T - t0) / steps if steps else 0.0
    eye = np.eye(n)
    out = np.empty((pts.shape[0], n_theta))

    def check_box(x):
        if box is None:
            return
        lo, hi = (np.asarray(b, dtype=float) for b in box)
        if np.any(x - fd_step < lo) or np.any(x + fd_step > hi):
            raise GeometryError(f"finite-difference stencil at x = {x} leaves the computational box")

    for ip, xT in enumerate(pts):
        # characteristics through (T, xT, theta_j)
        U_T, M_T, st_T = lead.values(T, xT, th_grid)
        if M_T * st_T >= 1:
            raise ShockError("leading profile shocks before T", s_tilde=st_T)
        q = th_grid - U_T * st_T
        x0 = xT - (T - t0) * w
        U1 = np.real(1j * first_corrector(chi, w, t0, x0[None, :]))[0] * np.sin(q)

        def rhs(t, U1, _xT=xT, _q=q, _U=U_T):
            x = _xT - (T - t) * w
            check_box(x)
            U0, M, st = lead.values(t, x, th_grid)
            if abs(M * st) >= 1:
                raise ShockError(f"leading profile shocks at t = {t}", s_tilde=st)
            a = float(alpha.evaluate(x[None, :])[0])
            th = _q + _U * st
            # theta derivative of U_0 on the characteristic: psi = q
            dthU0 = -M * np.sin(_q) / (1.0 - M * st * np.sin(_q))
            up, _, _ = lead.values(t + fd_step, x, th_grid)
            um, _, _ = lead.values(t - fd_step, x, th_grid)
            box_u = (up - 2 * U0 + um) / fd_step**2
            for j in range(n):
                xp, _, _ = lead.values(t, x + fd_step * eye[j], th_grid)
                xm, _, _ = lead.values(t, x - fd_step * eye[j], th_grid)
                box_u -= (xp - 2 * U0 + xm) / fd_step**2
            dt_sq = (up * up - um * um) / (2 * fd_step)
            src = 0.5 * spectral_antiderivative(box_u - box_u.mean()) + a * dt_sq
            if beta1 == "zero_mean":
                src = src - src.mean()
            return -a * dthU0 * U1 + fourier_interpolate(src, th)

        for k in range(steps):
            k1 = rhs(times[2 * k], U1)
            k2 = rhs(times[2 * k + 1], U1 + 0.5 * dt * k1)
            k3 = rhs(times[2 * k + 1], U1 + 0.5 * dt * k2)
            k4 = rhs(times[2 * k + 2], U1 + dt * k3)
            U1 = U1 + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        # each curve ends on its own grid phase, so no resampling is needed
        out[ip] = U1
    return U1Result(pts, out, float(T), float(t0), beta1)
