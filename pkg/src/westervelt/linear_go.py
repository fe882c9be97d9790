"""Linear geometric optics for the forward packet.

Cauchy data ``p = 2h chi(x) cos(x . omega / h)``, ``p_t = 0`` split into two
packets with phases ``phi_pm = -+t + x . omega``.  Two amplitude terms are
built:

    a_{+,0}(t, x) = chi(x - t omega)
    a_{+,1}(t, x) = (i t / 2) Lap' chi(x - t omega)

where ``Lap'`` is the Laplacian transverse to ``omega``.  ``a_{-,j}`` follow
by ``t -> -t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.special import erf, eval_hermite

from .errors import DomainError, GeometryError
from .nonlinearity import rotation_to

_SQRT_PI = math.sqrt(math.pi)


class Profile1D:
    """Smooth scalar function of one variable with closed-form derivatives."""

    amplitude: float = 1.0

    def derivative(self, z, order=0):
        raise NotImplementedError

    def __call__(self, z):
        return self.derivative(z, 0)

    def support(self):
        """Interval outside which ``|f| < 1e-12 * amplitude``."""
        raise NotImplementedError

    @property
    def maximum(self):
        return abs(self.amplitude)


def _gauss_deriv(u, order):
    # d^n/du^n exp(-u^2) = (-1)^n H_n(u) exp(-u^2)
    return (-1) ** order * eval_hermite(order, u) * np.exp(-u * u)


@dataclass(frozen=True)
class GaussianProfile(Profile1D):
    """``amplitude * exp(-((z - center)/width)^2 / 2)``."""

    center: float = 0.0
    width: float = 1.0
    amplitude: float = 1.0

    def derivative(self, z, order=0):
        s = math.sqrt(2.0) * self.width
        u = (np.asarray(z, dtype=float) - self.center) / s
        return self.amplitude * _gauss_deriv(u, order) / s**order

    def support(self):
        r = 7.5 * self.width
        return (self.center - r, self.center + r)


@dataclass(frozen=True)
class PlateauProfile(Profile1D):
    """Flat top of half-width ``half_width`` with erf skirts of scale ``edge``.

    ``f(z) = A/2 [erf((z - c + w)/e) - erf((z - c - w)/e)]``.
    """

    center: float = 0.0
    half_width: float = 1.0
    edge: float = 0.1
    amplitude: float = 1.0

    def derivative(self, z, order=0):
        z = np.asarray(z, dtype=float) - self.center
        e = self.edge
        a = (z + self.half_width) / e
        b = (z - self.half_width) / e
        if order == 0:
            return 0.5 * self.amplitude * (erf(a) - erf(b))
        # d^n erf(u/e)/dz^n = 2/sqrt(pi) e^{-n} d^{n-1} exp(-u^2)
        k = order - 1
        c = self.amplitude / (_SQRT_PI * e**order)
        return c * (_gauss_deriv(a, k) - _gauss_deriv(b, k))

    def support(self):
        # erfc(u) < 1e-12 for u > 5.05
        r = self.half_width + 5.1 * self.edge
        return (self.center - r, self.center + r)

    @property
    def maximum(self):
        return abs(float(self.derivative(self.center)))


@dataclass(frozen=True)
class PolynomialProfile(Profile1D):
    """Polynomial ``sum_j c_j z^j`` (no compact support); used as an analytic test envelope."""

    coefficients: Sequence[float] = (1.0,)

    def derivative(self, z, order=0):
        p = np.polynomial.Polynomial(self.coefficients).deriv(order) if order else np.polynomial.Polynomial(self.coefficients)
        return p(np.asarray(z, dtype=float))

    def support(self):
        return (-np.inf, np.inf)

    @property
    def maximum(self):
        return math.inf


@dataclass(frozen=True)
class ConstantProfile(Profile1D):
    value: float = 1.0

    def derivative(self, z, order=0):
        z = np.asarray(z, dtype=float)
        return np.full(z.shape, self.value if order == 0 else 0.0)

    def support(self):
        return (-np.inf, np.inf)

    @property
    def maximum(self):
        return abs(self.value)


class Envelope:
    """Beam envelope ``chi`` on R^n."""

    dim: int

    def __call__(self, points):
        raise NotImplementedError

    def transverse_laplacian(self, points, direction):
        """``Lap' chi`` transverse to ``direction`` at ``points`` of shape (..., n)."""
        raise NotImplementedError

    def directional_derivative(self, points, direction):
        raise NotImplementedError

    def directional_transverse_laplacian(self, points, direction):
        """``omega . grad (Lap' chi)``."""
        raise NotImplementedError

    def support_box(self):
        """``(frame, lower, upper)``: the support lies in ``frame @ [lower, upper]``."""
        raise NotImplementedError

    @property
    def chi_max(self):
        raise NotImplementedError

    def distance_to_ball(self, radius, shift=None):
        """Distance from ``B(0, radius)`` to the support translated by ``shift``; negative if they meet."""
        frame, lo, hi = self.support_box()
        shift = np.zeros(self.dim) if shift is None else np.asarray(shift, dtype=float)
        z0 = -(frame.T @ shift)  # origin in the translated envelope frame
        gap = np.maximum(np.maximum(lo - z0, z0 - hi), 0.0)
        return float(np.linalg.norm(gap)) - radius


@dataclass(frozen=True, eq=False)
class BeamEnvelope(Envelope):
    """Separable envelope in a rotated frame.

    ``chi(x) = longitudinal(z_n) * prod_j transverse[j](z_j)``, with
    ``z = frame.T @ x``.  The default frame is the identity, so the
    longitudinal profile runs along the last coordinate axis.
    """

    longitudinal: Profile1D
    transverse: tuple = ()
    frame: np.ndarray | None = None

    def __post_init__(self):
        n = len(self.transverse) + 1
        frame = np.eye(n) if self.frame is None else np.asarray(self.frame, dtype=float)
        if frame.shape != (n, n):
            raise DomainError("envelope frame must be n x n with n = len(transverse) + 1")
        object.__setattr__(self, "frame", frame)

    @property
    def dim(self):
        return len(self.transverse) + 1

    @property
    def profiles(self):
        return tuple(self.transverse) + (self.longitudinal,)

    def _frame_coords(self, points):
        points = np.asarray(points, dtype=float)
        if self.dim == 1 and (points.ndim == 0 or points.shape[-1] != 1):
            points = points[..., None]
        return points @ self.frame

    def partial(self, points, orders):
        """Mixed frame derivative with per-axis ``orders``."""
        z = self._frame_coords(points)
        out = np.ones(z.shape[:-1])
        for j, (prof, k) in enumerate(zip(self.profiles, orders)):
            out = out * prof.derivative(z[..., j], k)
        return out

    def __call__(self, points):
        return self.partial(points, (0,) * self.dim)

    def _aligned(self, direction):
        return np.allclose(self.frame[:, -1], np.asarray(direction, dtype=float), atol=1e-12)

    def transverse_laplacian(self, points, direction):
        if not self._aligned(direction):
            return _fd_transverse_laplacian(self, points, direction)
        n = self.dim
        total = 0.0
        for j in range(n - 1):
            orders = [0] * n
            orders[j] = 2
            total = total + self.partial(points, orders)
        return total if n > 1 else np.zeros(np.shape(self._frame_coords(points))[:-1])

    def directional_derivative(self, points, direction):
        if not self._aligned(direction):
            return _fd_directional(lambda p: self(p), points, direction)
        orders = [0] * self.dim
        orders[-1] = 1
        return self.partial(points, orders)

    def directional_transverse_laplacian(self, points, direction):
        if not self._aligned(direction):
            return _fd_directional(lambda p: self.transverse_laplacian(p, direction), points, direction)
        n = self.dim
        total = np.zeros(np.shape(self._frame_coords(points))[:-1])
        for j in range(n - 1):
            orders = [0] * n
            orders[j] = 2
            orders[-1] = 1
            total = total + self.partial(points, orders)
        return total

    def support_box(self):
        lo, hi = zip(*(p.support() for p in self.profiles))
        return self.frame, np.array(lo), np.array(hi)

    @property
    def chi_max(self):
        return float(np.prod([p.maximum for p in self.profiles]))


@dataclass(frozen=True, eq=False)
class FunctionEnvelope(Envelope):
    """Arbitrary vectorised ``chi(points)``; derivatives by 4th-order centred differences."""

    func: Callable
    dim: int
    lower: Sequence[float]
    upper: Sequence[float]
    maximum: float
    step: float = 1e-3

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        if self.dim == 1 and (points.ndim == 0 or points.shape[-1] != 1):
            points = points[..., None]
        return np.asarray(self.func(points), dtype=float)

    def transverse_laplacian(self, points, direction):
        return _fd_transverse_laplacian(self, points, direction, self.step)

    def directional_derivative(self, points, direction):
        return _fd_directional(self, points, direction, self.step)

    def directional_transverse_laplacian(self, points, direction):
        return _fd_directional(lambda p: self.transverse_laplacian(p, direction), points, direction, self.step)

    def support_box(self):
        return np.eye(self.dim), np.asarray(self.lower, dtype=float), np.asarray(self.upper, dtype=float)

    @property
    def chi_max(self):
        return float(self.maximum)


def _pts(points, dim):
    points = np.asarray(points, dtype=float)
    if dim == 1 and (points.ndim == 0 or points.shape[-1] != 1):
        points = points[..., None]
    return points


def _fd_transverse_laplacian(chi, points, direction, step=1e-3):
    points = _pts(points, chi.dim)
    B = rotation_to(np.asarray(direction, dtype=float))
    total = np.zeros(points.shape[:-1])
    for j in range(chi.dim - 1):
        e = B[:, j] * step
        total += (
            -chi(points + 2 * e) + 16 * chi(points + e) - 30 * chi(points) + 16 * chi(points - e) - chi(points - 2 * e)
        ) / (12 * step * step)
    return total


def _fd_directional(f, points, direction, step=1e-3):
    e = np.asarray(direction, dtype=float) * step
    points = np.asarray(points, dtype=float)
    return (-f(points + 2 * e) + 8 * f(points + e) - 8 * f(points - e) + f(points - 2 * e)) / (12 * step)


class LinearAmplitudes(NamedTuple):
    a_plus_0: np.ndarray
    a_minus_0: np.ndarray
    a_plus_1: np.ndarray
    a_minus_1: np.ndarray


def leading_amplitudes(chi, direction, t, x):
    """``(a_{+,0}, a_{-,0}) = (chi(x - t omega), chi(x + t omega))``."""
    w = np.atleast_1d(np.asarray(direction, dtype=float))
    x = _pts(x, w.size)
    return chi(x - t * w), chi(x + t * w)


def first_corrector(chi, direction, t, x):
    """``a_{+,1} = (i t / 2) Lap' chi(x - t omega)`` (pure imaginary)."""
    w = np.atleast_1d(np.asarray(direction, dtype=float))
    x = _pts(x, w.size)
    return 0.5j * t * chi.transverse_laplacian(x - t * w, w)


def amplitudes(chi, direction, t, x):
    w = np.atleast_1d(np.asarray(direction, dtype=float))
    a0p, a0m = leading_amplitudes(chi, w, t, x)
    return LinearAmplitudes(a0p, a0m, first_corrector(chi, w, t, x), first_corrector(chi, w, -t, x))


def two_term_field(chi, direction, h, t, x, packets="both"):
    """``Re(e^{i phi_+/h} h a_+) + Re(e^{i phi_-/h} h a_-)`` with ``a = a_0 + h a_1``.

    ``packets`` selects ``"plus"``, ``"minus"`` or ``"both"``.
    """
    w = np.atleast_1d(np.asarray(direction, dtype=float))
    x = _pts(x, w.size)
    xw = x @ w
    out = 0.0
    if packets in ("plus", "both"):
        a = chi(x - t * w) + h * first_corrector(chi, w, t, x)
        out = out + h * np.real(np.exp(1j * (-t + xw) / h) * a)
    if packets in ("minus", "both"):
        a = chi(x + t * w) + h * first_corrector(chi, w, -t, x)
        out = out + h * np.real(np.exp(1j * (t + xw) / h) * a)
    return out


def default_t0(chi, radius, direction):
    """Half the gap between ``supp chi`` and ``B(0, R)`` (unit speed)."""
    gap = chi.distance_to_ball(radius)
    if gap <= 0:
        raise GeometryError(f"envelope support meets B(0, {radius}) (gap {gap:.3g})")
    return 0.5 * gap


class HandoffData(NamedTuple):
    p: np.ndarray
    q: np.ndarray
    t0: float


def handoff_data(chi, direction, h, t0, x, radius=None):
    """Forward-packet Cauchy data ``(p_0^+, q_0^+)`` at ``t = t0`` on points ``x``.

    ``p_0^+ = Re(e^{i phi_+/h} h a_+)`` with ``a_+ = a_{+,0} + h a_{+,1}``;
    ``q_0^+`` is its exact time derivative.  With ``radius`` given, the
    translated support must stay outside ``B(0, radius)``.
    """
    w = np.atleast_1d(np.asarray(direction, dtype=float))
    if t0 < 0:
        raise DomainError("t0 must be non-negative")
    if radius is not None:
        gap = chi.distance_to_ball(radius, shift=t0 * w)
        if gap <= 0:
            raise GeometryError(f"support of chi(x - t0 omega) meets B(0, {radius}) at t0 = {t0}")
    x = _pts(x, w.size)
    y = x - t0 * w
    theta = (-t0 + x @ w) / h
    c, s = np.cos(theta), np.sin(theta)
    a0 = chi(y)
    b = 0.5 * t0 * chi.transverse_laplacian(y, w)  # a_{+,1} = i b
    da0 = -chi.directional_derivative(y, w)
    db = 0.5 * chi.transverse_laplacian(y, w) - 0.5 * t0 * chi.directional_transverse_laplacian(y, w)
    # p = h (a0 cos - h b sin), d theta/dt = -1/h
    p = h * (a0 * c - h * b * s)
    q = h * (da0 * c + a0 * s / h - h * db * s) + h * b * c
    return HandoffData(p, q, t0)
