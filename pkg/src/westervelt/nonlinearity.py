"""Nonlinearity coefficient fields, rays, and integrals along rays.

A field is any object with ``dim``, ``support_radius`` and an ``evaluate``
method taking points of shape ``(..., dim)``.  Fields are immutable and cheap
to pickle, so ray computations can be farmed out to worker processes.

The accumulated nonlinearity along a ray,

    s_tilde(s) = int_0^s alpha(y + sigma * omega) d sigma,

is the effective Burgers time of the leading profile; it drives both the shock
test and the tilt measured by the inverse problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import integrate, optimize
from scipy.ndimage import map_coordinates
from scipy.special import erf, erfc

from .errors import DomainError, EvaluationError

QUAD_EPSABS = 1e-10

# exp(-r^2/2) < 1e-12 beyond 7.44 widths
_GAUSS_SUPPORT_WIDTHS = 7.5


def _as_points(x, dim):
    x = np.asarray(x, dtype=float)
    if dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != dim:
        raise DomainError(f"expected points with trailing dimension {dim}, got shape {x.shape}")
    return x


def rotation_to(direction):
    """Return a rotation ``B`` (``det B = 1`` for n >= 2) with ``B @ e_n = direction``.

    The remaining columns of ``B`` form an orthonormal basis of the plane
    transverse to ``direction``; they define the ``x'`` coordinates used by
    the linear geometric-optics correctors.
    """
    w = np.asarray(direction, dtype=float)
    n = w.size
    if n == 1:
        return np.array([[w[0]]])
    if n == 2:
        return np.array([[w[1], w[0]], [-w[0], w[1]]])
    if n == 3:
        c = w[2]
        if c < -1 + 1e-12:
            return np.diag([1.0, -1.0, -1.0])
        v = np.array([-w[1], w[0], 0.0])  # e_3 x w
        vx = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
        return np.eye(3) + vx + vx @ vx / (1 + c)
    raise DomainError(f"dimension {n} not supported")


def planar_rotation(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class Ray:
    """Base point ``y`` and unit direction ``omega``; points are ``y + s*omega``."""

    base: np.ndarray
    direction: np.ndarray
    amplitude: float | None = None

    def __post_init__(self):
        base = np.atleast_1d(np.asarray(self.base, dtype=float))
        direction = np.atleast_1d(np.asarray(self.direction, dtype=float))
        if base.shape != direction.shape:
            raise DomainError("ray base and direction must have the same dimension")
        if abs(np.linalg.norm(direction) - 1.0) > 1e-12:
            raise DomainError(f"ray direction must be a unit vector, |omega| = {np.linalg.norm(direction)!r}")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "direction", direction)

    @property
    def dim(self):
        return self.base.size

    def point(self, s):
        s = np.asarray(s, dtype=float)
        return self.base + s[..., None] * self.direction

    def phase(self, t, x):
        """Plane-wave phase ``-t + x . omega``."""
        return -t + np.asarray(x, dtype=float) @ self.direction

    def shifted(self, c):
        """Same line with the base point moved by ``c`` along the direction."""
        return Ray(self.base + c * self.direction, self.direction, self.amplitude)

    def ball_interval(self, radius):
        """Parameter interval ``[s_in, s_out]`` of the ray inside ``B(0, radius)``, or None."""
        if not np.isfinite(radius):
            return (-np.inf, np.inf)
        b = float(self.base @ self.direction)
        disc = b * b - float(self.base @ self.base) + radius * radius
        if disc <= 0:
            return None
        r = math.sqrt(disc)
        return (-b - r, -b + r)


@dataclass(frozen=True, eq=False)
class RigidMotion:
    """Shift ``y'`` (length n-1) and rotation ``B``; acts on fields as ``x -> alpha(B(x + (y', 0)))``."""

    shift: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        rot = np.atleast_2d(np.asarray(self.rotation, dtype=float))
        shift = np.atleast_1d(np.asarray(self.shift, dtype=float)).reshape(-1)
        n = rot.shape[0]
        if rot.shape != (n, n) or shift.size != n - 1:
            raise DomainError("rotation must be n x n and shift of length n-1")
        if np.abs(rot.T @ rot - np.eye(n)).max() > 1e-12:
            raise DomainError("rotation is not orthogonal to 1e-12")
        if np.linalg.det(rot) < 0:
            raise DomainError("rotation must have det B = 1")
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "shift", shift)

    @classmethod
    def identity(cls, dim):
        return cls(np.zeros(dim - 1), np.eye(dim))

    @classmethod
    def planar(cls, angle, shift=0.0):
        return cls(np.array([shift]), planar_rotation(angle))

    @property
    def full_shift(self):
        return np.append(self.shift, 0.0)


class NonlinearityField:
    """Base class for nonlinearity coefficients ``alpha(x)``."""

    dim: int
    support_radius: float
    nonnegative: bool = True

    def evaluate(self, points):
        raise NotImplementedError

    def __call__(self, x):
        return self.evaluate(_as_points(x, self.dim))

    def sample(self, grid_axes):
        """Evaluate on the tensor grid spanned by ``grid_axes`` (one coordinate array per axis)."""
        mesh = np.meshgrid(*grid_axes, indexing="ij")
        return self.evaluate(np.stack(mesh, axis=-1))


@dataclass(frozen=True, eq=False)
class ZeroField(NonlinearityField):
    dim: int = 1
    support_radius: float = 0.0

    def evaluate(self, points):
        return np.zeros(np.shape(points)[:-1])


@dataclass(frozen=True, eq=False)
class ConstantField(NonlinearityField):
    """``alpha = value`` everywhere (unbounded support)."""

    value: float = 1.0
    dim: int = 1

    @property
    def support_radius(self):
        return math.inf if self.value != 0 else 0.0

    @property
    def nonnegative(self):
        return self.value >= 0

    def evaluate(self, points):
        return np.full(np.shape(points)[:-1], float(self.value))


@dataclass(frozen=True, eq=False)
class BoxField(NonlinearityField):
    """``value`` on the closed box ``[lower, upper]``, zero elsewhere."""

    value: float
    lower: Sequence[float]
    upper: Sequence[float]

    @property
    def dim(self):
        return len(self.lower)

    @property
    def support_radius(self):
        corners = np.maximum(np.abs(self.lower), np.abs(self.upper))
        return float(np.linalg.norm(corners))

    @property
    def nonnegative(self):
        return self.value >= 0

    def evaluate(self, points):
        inside = np.all((points >= np.asarray(self.lower)) & (points <= np.asarray(self.upper)), axis=-1)
        return np.where(inside, float(self.value), 0.0)

    def breakpoints(self, ray):
        out = []
        for j in range(self.dim):
            if abs(ray.direction[j]) > 0:
                for bound in (self.lower[j], self.upper[j]):
                    out.append((bound - ray.base[j]) / ray.direction[j])
        return out


@dataclass(frozen=True, eq=False)
class GaussianField(NonlinearityField):
    """``amplitude * exp(-sum_j ((x_j - c_j)/w_j)^2 / 2)``.

    ``width`` is a scalar (isotropic) or one width per axis.  The support is
    relaxed to the ball where the field exceeds ``1e-12 * amplitude``.
    """

    amplitude: float = 1.0
    width: float | Sequence[float] = 1.0
    center: Sequence[float] | None = None
    dim: int = 1

    @property
    def _center(self):
        return np.zeros(self.dim) if self.center is None else np.asarray(self.center, dtype=float)

    @property
    def _widths(self):
        return np.broadcast_to(np.asarray(self.width, dtype=float), (self.dim,))

    @property
    def support_radius(self):
        return float(np.linalg.norm(self._center) + _GAUSS_SUPPORT_WIDTHS * self._widths.max())

    @property
    def nonnegative(self):
        return self.amplitude >= 0

    def evaluate(self, points):
        z = (points - self._center) / self._widths
        return self.amplitude * np.exp(-0.5 * np.sum(z * z, axis=-1))

    def exact_line_integral(self, ray, s0=-np.inf, s1=np.inf):
        """Closed-form integral along ``ray`` over ``[s0, s1]`` (oracle for tests)."""
        inv = 1.0 / self._widths**2
        d = ray.base - self._center
        a = float(np.sum(ray.direction**2 * inv))
        b = float(np.sum(ray.direction * d * inv))
        c = float(np.sum(d * d * inv))
        # exponent -(a s^2 + 2 b s + c)/2
        s_star = -b / a
        peak = self.amplitude * math.exp(-0.5 * (c - b * b / a))
        scale = math.sqrt(2.0 / a)
        lo = -1.0 if s0 == -np.inf else erf((s0 - s_star) / scale)
        hi = 1.0 if s1 == np.inf else erf((s1 - s_star) / scale)
        return peak * math.sqrt(math.pi / (2 * a)) * (hi - lo)


@dataclass(frozen=True, eq=False)
class DiskField(NonlinearityField):
    """Ball of radius ``radius`` with an erf-smoothed edge of width ``edge``."""

    amplitude: float = 1.0
    radius: float = 0.25
    center: Sequence[float] = (0.0, 0.0)
    edge: float = 0.01

    @property
    def dim(self):
        return len(self.center)

    @property
    def support_radius(self):
        return float(np.linalg.norm(self.center) + self.radius + 6 * self.edge)

    @property
    def nonnegative(self):
        return self.amplitude >= 0

    def evaluate(self, points):
        r = np.linalg.norm(points - np.asarray(self.center, dtype=float), axis=-1)
        return self.amplitude * 0.5 * erfc((r - self.radius) / self.edge)

    def centroid(self):
        return np.asarray(self.center, dtype=float)


@dataclass(frozen=True, eq=False)
class SumField(NonlinearityField):
    terms: tuple

    @property
    def dim(self):
        return self.terms[0].dim

    @property
    def support_radius(self):
        return max(t.support_radius for t in self.terms)

    @property
    def nonnegative(self):
        return all(t.nonnegative for t in self.terms)

    def evaluate(self, points):
        return sum(t.evaluate(points) for t in self.terms)

    def exact_line_integral(self, ray, s0=-np.inf, s1=np.inf):
        return sum(t.exact_line_integral(ray, s0, s1) for t in self.terms)


@dataclass(frozen=True, eq=False)
class SampledField(NonlinearityField):
    """Grid samples (row-major, axis order x_1..x_n) with spline interpolation.

    Outside the grid the field is zero.  ``order`` is the spline order passed
    to :func:`scipy.ndimage.map_coordinates` (3 = cubic).
    """

    values: np.ndarray
    origin: Sequence[float]
    spacing: Sequence[float]
    order: int = 3
    _coeffs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        from scipy.ndimage import spline_filter

        values = np.asarray(self.values, dtype=float)
        if values.ndim != len(self.origin) or values.ndim != len(self.spacing):
            raise DomainError("sampled field: origin/spacing must match the array rank")
        object.__setattr__(self, "values", values)
        coeffs = spline_filter(values, order=self.order, mode="constant") if self.order > 1 else values
        object.__setattr__(self, "_coeffs", coeffs)

    @property
    def dim(self):
        return self.values.ndim

    @property
    def support_radius(self):
        origin = np.asarray(self.origin, dtype=float)
        far = origin + (np.asarray(self.values.shape) - 1) * np.asarray(self.spacing, dtype=float)
        return float(np.linalg.norm(np.maximum(np.abs(origin), np.abs(far))))

    @property
    def nonnegative(self):
        return bool(np.all(self.values >= 0))

    def evaluate(self, points):
        idx = (points - np.asarray(self.origin)) / np.asarray(self.spacing)
        flat = idx.reshape(-1, self.dim).T
        out = map_coordinates(self._coeffs, flat, order=self.order, mode="constant", cval=0.0, prefilter=False)
        return out.reshape(points.shape[:-1])


@dataclass(frozen=True, eq=False)
class MovedField(NonlinearityField):
    """``x -> base(B (x + s))`` for a rigid motion with full shift vector ``s``."""

    base: NonlinearityField
    motion: RigidMotion

    @property
    def dim(self):
        return self.base.dim

    @property
    def support_radius(self):
        return self.base.support_radius + float(np.linalg.norm(self.motion.shift))

    @property
    def nonnegative(self):
        return self.base.nonnegative

    def evaluate(self, points):
        moved = (points + self.motion.full_shift) @ self.motion.rotation.T
        return self.base.evaluate(moved)

    def exact_line_integral(self, ray, s0=-np.inf, s1=np.inf):
        B = self.motion.rotation
        mapped = Ray(B @ (ray.base + self.motion.full_shift), B @ ray.direction)
        return self.base.exact_line_integral(mapped, s0, s1)


@dataclass(frozen=True, eq=False)
class CallableField(NonlinearityField):
    """Wrap a vectorised callable ``f(points) -> values``."""

    func: Callable
    dim: int
    support_radius: float
    nonnegative: bool = False

    def evaluate(self, points):
        return np.asarray(self.func(points), dtype=float)


def apply_motion(alpha, motion):
    """Rigidly moved field ``alpha_eta(x) = alpha(B(x + (y', 0)))``."""
    if motion.rotation.shape[0] != alpha.dim:
        raise DomainError("motion and field dimensions differ")
    return MovedField(alpha, motion)


def _scalar_integrand(alpha, ray):
    def f(s):
        v = float(alpha.evaluate(ray.point(np.array([s])))[0])
        if not math.isfinite(v):
            raise EvaluationError(f"non-finite alpha = {v} at x = {ray.point(s)}", point=ray.point(s))
        return v

    return f


def line_integral(alpha, ray, s0=-np.inf, s1=np.inf, epsabs=QUAD_EPSABS):
    """``int_{s0}^{s1} alpha(y + s omega) ds`` by adaptive Gauss-Kronrod quadrature.

    The interval is clipped to the part of the ray inside the support ball,
    so infinite limits are allowed for compactly supported fields.
    """
    if s0 > s1:
        raise DomainError(f"line_integral needs s0 <= s1, got {s0} > {s1}")
    if isinstance(alpha, ZeroField):
        return 0.0
    span = ray.ball_interval(alpha.support_radius)
    if span is None:
        return 0.0
    a, b = max(s0, span[0]), min(s1, span[1])
    if a >= b:
        return 0.0
    if not (math.isfinite(a) and math.isfinite(b)):
        raise EvaluationError("line integral over an infinite segment of an unbounded field")
    points = []
    if hasattr(alpha, "breakpoints"):
        points = [p for p in alpha.breakpoints(ray) if a < p < b]
    # closest approach to the origin helps localised bumps
    s_c = -float(ray.base @ ray.direction)
    if a < s_c < b:
        points.append(s_c)
    value, _ = integrate.quad(
        _scalar_integrand(alpha, ray), a, b, epsabs=epsabs, epsrel=1e-12, limit=500, points=points or None
    )
    return value


def accumulated_integral(alpha, ray, s):
    """``s_tilde`` at each parameter in ``s`` (ascending), built from successive panels."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.empty_like(s)
    if np.any(np.diff(s) < 0):
        raise DomainError("accumulated_integral needs ascending parameters")
    lo = min(0.0, s[0])
    total = -line_integral(alpha, ray, lo, 0.0) if lo < 0 else 0.0
    prev = lo
    for i, si in enumerate(s):
        total += line_integral(alpha, ray, prev, si)
        out[i] = total
        prev = si
    return out


def shock_parameter(alpha, ray, M, panels=256):
    """Smallest ``s >= 0`` with ``s_tilde(s) = 1/M``, or ``inf`` when never reached.

    The accumulated integral is scanned panel by panel; the first panel that
    brackets ``1/M`` is refined with Brent's method.
    """
    if not M > 0:
        raise DomainError("shock_parameter needs M > 0 (only positive crests steepen into shocks)")
    target = 1.0 / M
    span = ray.ball_interval(alpha.support_radius)
    if span is None or span[1] <= 0:
        return math.inf

    def refine(lo, g_lo, hi):
        return optimize.brentq(lambda s: g_lo + line_integral(alpha, ray, lo, s) - target, lo, hi, xtol=1e-13)

    if math.isfinite(span[1]):
        edges = np.linspace(0.0, span[1], panels + 1)
        g = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            g_hi = g + line_integral(alpha, ray, lo, hi)
            if g_hi >= target:
                return refine(lo, g, hi)
            g = g_hi
        return math.inf
    # unbounded support: panels of doubling length
    lo, g, width = 0.0, 0.0, 1.0
    while lo < 1e12:
        hi = lo + width
        g_hi = g + line_integral(alpha, ray, lo, hi)
        if g_hi >= target:
            return refine(lo, g, hi)
        lo, g, width = hi, g_hi, width * 2
    return math.inf


class NoShockCheck(NamedTuple):
    satisfied: bool
    lhs: float
    max_integral: float


def parallel_rays(dim, radius, direction=None, n_offsets=None):
    """Family of parallel rays with impact parameters spanning ``[-radius, radius]``."""
    if direction is None:
        direction = np.eye(dim)[-1]
    direction = np.asarray(direction, dtype=float)
    if dim == 1:
        return [Ray(np.zeros(1), direction)]
    B = rotation_to(direction)
    if dim == 2:
        n = 401 if n_offsets is None else n_offsets
        return [Ray(c * B[:, 0], direction) for c in np.linspace(-radius, radius, n)]
    n = 61 if n_offsets is None else n_offsets
    cs = np.linspace(-radius, radius, n)
    return [
        Ray(a * B[:, 0] + b * B[:, 1], direction)
        for a in cs
        for b in cs
        if a * a + b * b <= radius * radius * (1 + 1e-12)
    ]


def no_shock_condition(alpha, chi_max, direction=None, n_offsets=None):
    """Evaluate ``chi_max * max_rays int alpha < 1`` over a grid of parallel rays.

    Default grids: 401 offsets in 2D, 61 x 61 offsets in 3D.
    """
    if chi_max < 0:
        raise DomainError("chi_max must be non-negative")
    if isinstance(alpha, ZeroField) or chi_max == 0:
        return NoShockCheck(True, 0.0, 0.0 if isinstance(alpha, ZeroField) else math.nan)
    rays = parallel_rays(alpha.dim, alpha.support_radius, direction, n_offsets)
    best = max(line_integral(alpha, r) for r in rays)
    lhs = chi_max * best
    return NoShockCheck(bool(lhs < 1.0), lhs, best)
