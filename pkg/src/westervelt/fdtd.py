"""Direct leapfrog solver for the Westervelt equation in 1D and 2D.

The expanded equation ``(1 - 2 alpha p) p_tt - Lap p - 2 alpha p_t^2 = 0``
is advanced by

    p^{n+1} = 2 p^n - p^{n-1} + dt^2 (Lap_h p^n + 2 alpha v^2) / (1 - 2 alpha p^n),
    v = (p^{n+1} - p^{n-1}) / (2 dt),

which is implicit in ``p^{n+1}`` only through the pointwise ``v`` term; each
node is resolved by fixed-point iteration from the explicit predictor.
1D grids are stored as ``(n, 1)`` arrays so a single 2D kernel serves both.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Sequence

import numba
import numpy as np

from .errors import (
    AlignmentError,
    DomainError,
    HyperbolicityError,
    ShockError,
    StepConvergenceError,
)
from .linear_go import handoff_data, two_term_field
from .nonlinearity import NonlinearityField, ZeroField, no_shock_condition

BOUNDARIES = {"dirichlet": 0, "mur": 1, "periodic": 2}
ALPHA_FLOOR = 1e-14


@dataclass(frozen=True)
class Grid:
    """Uniform node-centred grid; node ``i`` on axis ``j`` sits at ``origin[j] + i * spacing[j]``."""

    origin: tuple
    spacing: tuple
    shape: tuple

    def __post_init__(self):
        if not (len(self.origin) == len(self.spacing) == len(self.shape)) or len(self.shape) not in (1, 2):
            raise DomainError("grid needs matching origin/spacing/shape of dimension 1 or 2")
        if any(d <= 0 for d in self.spacing):
            raise DomainError("grid spacing must be positive")

    @classmethod
    def from_bounds(cls, lower, upper, spacing):
        lower, upper = tuple(map(float, lower)), tuple(map(float, upper))
        spacing = tuple(map(float, spacing))
        shape = tuple(int(math.floor((u - l) / d + 1e-9)) + 1 for l, u, d in zip(lower, upper, spacing))
        return cls(lower, spacing, shape)

    @property
    def dim(self):
        return len(self.shape)

    @property
    def storage_shape(self):
        return self.shape if self.dim == 2 else (self.shape[0], 1)

    def axes(self):
        return [o + d * np.arange(n) for o, d, n in zip(self.origin, self.spacing, self.shape)]

    def points(self):
        """Node coordinates, shape ``storage_shape + (dim,)``."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        pts = np.stack(mesh, axis=-1)
        return pts.reshape(self.storage_shape + (self.dim,))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    def same_as(self, other):
        return (
            self.shape == other.shape
            and np.allclose(self.origin, other.origin, atol=1e-12)
            and np.allclose(self.spacing, other.spacing, rtol=1e-12)
        )


@dataclass(eq=False)
class WaveField:
    """Two stored time levels ``p^{n-1}, p^n``; the solver produces the third."""

    grid: Grid
    p_prev: np.ndarray
    p: np.ndarray
    t: float
    dt: float
    steps: int = 0

    @property
    def velocity(self):
        return (self.p - self.p_prev) / self.dt

    def values(self):
        """``p^n`` in the grid's natural shape."""
        return self.p.reshape(self.grid.shape)

    def copy(self):
        return WaveField(self.grid, self.p_prev.copy(), self.p.copy(), self.t, self.dt, self.steps)


@dataclass(frozen=True)
class StepSettings:
    cfl: float = 0.4
    b0: float = 0.5
    tol: float = 1e-12
    max_iter: int = 25
    boundary: str | Sequence[str] = "mur"

    def codes(self, dim):
        b = self.boundary
        if isinstance(b, str):
            b = [b] * (2 * dim)
        b = list(b)
        if len(b) == dim:
            b = [x for x in b for _ in range(2)]
        if len(b) != 2 * dim:
            raise DomainError("boundary needs 1, dim or 2*dim entries")
        try:
            codes = [BOUNDARIES[x] for x in b]
        except KeyError as exc:
            raise DomainError(f"unknown boundary {exc.args[0]!r}; choose from {sorted(BOUNDARIES)}") from None
        for j in range(dim):
            if (codes[2 * j] == 2) != (codes[2 * j + 1] == 2):
                raise DomainError("periodic boundaries must be paired on an axis")
        if dim == 1:
            codes += [2, 2]  # dummy second axis
        return np.array(codes, dtype=np.int64)


def max_stable_dt(grid, cfl=0.4, b0=0.5):
    """``cfl * sqrt(b0) / sqrt(sum_j dx_j^-2)``; equals ``cfl dx sqrt(b0)/sqrt(n)`` on square grids."""
    if not 0 < cfl <= 0.5:
        raise DomainError("cfl must lie in (0, 0.5]")
    return cfl * math.sqrt(b0) / math.sqrt(sum(1.0 / d**2 for d in grid.spacing))


@numba.njit(cache=True)
def _laplacian(p, i, j, im, ip, jm, jp, idx2, idy2):
    return (p[im, j] - 2.0 * p[i, j] + p[ip, j]) * idx2 + (p[i, jm] - 2.0 * p[i, j] + p[i, jp]) * idy2


@numba.njit(cache=True)
def _apply_edges(p, pn, dt, dx, dy, bc):
    nx, ny = p.shape
    if bc[0] == 0:
        pn[0, :] = 0.0
    elif bc[0] == 1:
        c = (dt - dx) / (dt + dx)
        for j in range(ny):
            pn[0, j] = p[1, j] + c * (pn[1, j] - p[0, j])
    if bc[1] == 0:
        pn[nx - 1, :] = 0.0
    elif bc[1] == 1:
        c = (dt - dx) / (dt + dx)
        for j in range(ny):
            pn[nx - 1, j] = p[nx - 2, j] + c * (pn[nx - 2, j] - p[nx - 1, j])
    if bc[2] == 0:
        pn[:, 0] = 0.0
    elif bc[2] == 1:
        c = (dt - dy) / (dt + dy)
        for i in range(nx):
            pn[i, 0] = p[i, 1] + c * (pn[i, 1] - p[i, 0])
    if bc[3] == 0:
        pn[:, ny - 1] = 0.0
    elif bc[3] == 1:
        c = (dt - dy) / (dt + dy)
        for i in range(nx):
            pn[i, ny - 1] = p[i, ny - 2] + c * (pn[i, ny - 2] - p[i, ny - 1])


@numba.njit(cache=True)
def _leapfrog(pm, p, pn, alpha, dt, dx, dy, b0, tol, maxit, bc):
    """One step into ``pn``; returns ``(status, i, j)`` with status 1 hyperbolicity, 2 no convergence."""
    nx, ny = p.shape
    idx2 = 1.0 / (dx * dx)
    idy2 = 1.0 / (dy * dy)
    dt2 = dt * dt
    ilo = 0 if bc[0] == 2 else 1
    ihi = nx if bc[0] == 2 else nx - 1
    jlo = 0 if bc[2] == 2 else 1
    jhi = ny if bc[2] == 2 else ny - 1
    for i in range(ilo, ihi):
        im = i - 1 if i > 0 else nx - 1
        ip = i + 1 if i < nx - 1 else 0
        for j in range(jlo, jhi):
            jm = j - 1 if j > 0 else ny - 1
            jp = j + 1 if j < ny - 1 else 0
            lap = _laplacian(p, i, j, im, ip, jm, jp, idx2, idy2)
            a = alpha[i, j]
            pij = p[i, j]
            base = 2.0 * pij - pm[i, j]
            if a == 0.0:
                pn[i, j] = base + dt2 * lap
                continue
            den = 1.0 - 2.0 * a * pij
            if den < b0:
                return 1, i, j
            # x = base + g (lap + c (x - pm)^2) with c = 2 a / (2 dt)^2
            g = dt2 / den
            c = 0.5 * a / dt2
            pmij = pm[i, j]
            r = pij - pmij
            x = base + g * (lap + 4.0 * c * r * r)
            ok = False
            for _ in range(maxit):
                r = x - pmij
                xn = base + g * (lap + c * r * r)
                if abs(xn - x) <= tol:
                    x = xn
                    ok = True
                    break
                x = xn
            if not ok:
                return 2, i, j
            pn[i, j] = x
    _apply_edges(p, pn, dt, dx, dy, bc)
    return 0, -1, -1


@numba.njit(cache=True)
def _taylor_start(p0, q0, p1, alpha, dt, dx, dy, b0, bc):
    """``p^1 = p^0 + dt q^0 + dt^2/2 (Lap p^0 + 2 alpha q0^2)/(1 - 2 alpha p^0)``."""
    nx, ny = p0.shape
    idx2 = 1.0 / (dx * dx)
    idy2 = 1.0 / (dy * dy)
    ilo = 0 if bc[0] == 2 else 1
    ihi = nx if bc[0] == 2 else nx - 1
    jlo = 0 if bc[2] == 2 else 1
    jhi = ny if bc[2] == 2 else ny - 1
    for i in range(ilo, ihi):
        im = i - 1 if i > 0 else nx - 1
        ip = i + 1 if i < nx - 1 else 0
        for j in range(jlo, jhi):
            jm = j - 1 if j > 0 else ny - 1
            jp = j + 1 if j < ny - 1 else 0
            lap = _laplacian(p0, i, j, im, ip, jm, jp, idx2, idy2)
            den = 1.0 - 2.0 * alpha[i, j] * p0[i, j]
            if den < b0:
                return 1, i, j
            p1[i, j] = p0[i, j] + dt * q0[i, j] + 0.5 * dt * dt * (lap + 2.0 * alpha[i, j] * q0[i, j] ** 2) / den
    # edge nodes: first-order Taylor step, then Dirichlet edges pinned to 0
    for i in range(nx):
        for j in range(ny):
            if i < ilo or i >= ihi or j < jlo or j >= jhi:
                p1[i, j] = p0[i, j] + dt * q0[i, j]
    if bc[0] == 0:
        p1[0, :] = 0.0
    if bc[1] == 0:
        p1[nx - 1, :] = 0.0
    if bc[2] == 0:
        p1[:, 0] = 0.0
    if bc[3] == 0:
        p1[:, ny - 1] = 0.0
    return 0, -1, -1


def _spacings(grid):
    return (grid.spacing[0], grid.spacing[1] if grid.dim == 2 else 1.0)


def sample_alpha(alpha, grid):
    """Nonlinearity sampled on the grid nodes in storage shape."""
    if isinstance(alpha, np.ndarray):
        a = np.asarray(alpha, dtype=float).reshape(grid.storage_shape)
    elif isinstance(alpha, ZeroField):
        a = np.zeros(grid.storage_shape)
    else:
        a = alpha.evaluate(grid.points()).reshape(grid.storage_shape)
    if not np.all(np.isfinite(a)):
        raise DomainError("alpha is not finite on the grid")
    # negligible tails take the linear branch of the kernel
    a = np.where(np.abs(a) < ALPHA_FLOOR * max(np.abs(a).max(), 1e-300), 0.0, a)
    return np.ascontiguousarray(a)


def _raise_status(status, i, j, grid, t, field_p, alpha):
    node = (i,) if grid.dim == 1 else (i, j)
    x = [grid.origin[k] + grid.spacing[k] * node[k] for k in range(grid.dim)]
    if status == 1:
        val = 1.0 - 2.0 * alpha[i, j] * field_p[i, j]
        raise HyperbolicityError(
            f"1 - 2 alpha p = {val:.4g} below b0 at t = {t:.6g}, node {node} (x = {x})", time=t, node=node
        )
    raise StepConvergenceError(
        f"fixed-point iteration did not converge at t = {t:.6g}, node {node}; reduce dt (lower cfl)"
    )


def initialize(grid, p0, q0, alpha, dt, t0=0.0, settings=StepSettings()):
    """Start the leapfrog from Cauchy data ``(p0, q0)`` at ``t0`` with a Taylor step."""
    p0 = np.ascontiguousarray(np.asarray(p0, dtype=float).reshape(grid.storage_shape))
    q0 = np.ascontiguousarray(np.asarray(q0, dtype=float).reshape(grid.storage_shape))
    a = sample_alpha(alpha, grid)
    dx, dy = _spacings(grid)
    p1 = np.empty_like(p0)
    status, i, j = _taylor_start(p0, q0, p1, a, dt, dx, dy, settings.b0, settings.codes(grid.dim))
    if status:
        _raise_status(status, i, j, grid, t0, p0, a)
    return WaveField(grid, p0, p1, t0 + dt, dt, 1)


def step(field, alpha, settings=StepSettings()):
    """Advance one leapfrog step and return the new field (inputs are not modified)."""
    a = sample_alpha(alpha, field.grid)
    dx, dy = _spacings(field.grid)
    pn = np.empty_like(field.p)
    status, i, j = _leapfrog(
        field.p_prev, field.p, pn, a, field.dt, dx, dy, settings.b0, settings.tol, settings.max_iter,
        settings.codes(field.grid.dim),
    )
    if status:
        _raise_status(status, i, j, field.grid, field.t, field.p, a)
    return WaveField(field.grid, field.p.copy(), pn, field.t + field.dt, field.dt, field.steps + 1)


def advance(field, alpha, n_steps, settings=StepSettings(), callback=None):
    """Advance ``n_steps`` in place with rotating buffers; ``callback(field)`` after each step."""
    a = sample_alpha(alpha, field.grid)
    dx, dy = _spacings(field.grid)
    codes = settings.codes(field.grid.dim)
    spare = np.empty_like(field.p)
    for _ in range(n_steps):
        status, i, j = _leapfrog(
            field.p_prev, field.p, spare, a, field.dt, dx, dy, settings.b0, settings.tol, settings.max_iter, codes
        )
        if status:
            _raise_status(status, i, j, field.grid, field.t, field.p, a)
        field.p_prev, field.p, spare = field.p, spare, field.p_prev
        field.t += field.dt
        field.steps += 1
        if callback is not None:
            callback(field)
    return field


def leapfrog_energy(field):
    """Discrete energy ``sum[((p^n - p^{n-1})/dt)^2 + D+ p^n . D+ p^{n-1}] dV``.

    Conserved exactly by the linear scheme on periodic grids.
    """
    g = field.grid
    e = np.sum(((field.p - field.p_prev) / field.dt) ** 2)
    for ax in range(g.dim):
        d = g.spacing[ax]
        e += np.sum((np.roll(field.p, -1, ax) - field.p) * (np.roll(field.p_prev, -1, ax) - field.p_prev)) / d**2
    return float(e * g.cell_volume)


# -- experiments ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FDTDConfig:
    """Everything needed to run one direct simulation.

    ``start="cauchy"`` uses ``p = 2 h chi cos(x . omega / h)``, ``p_t = 0``, which
    launches two packets; ``start="forward"`` uses the forward two-term
    geometric-optics data at ``t0`` only.
    """

    alpha: NonlinearityField
    envelope: object
    direction: tuple
    h: float
    T: float
    lower: tuple
    upper: tuple
    spacing: tuple
    cfl: float = 0.4
    b0: float = 0.5
    boundary: str | tuple = "mur"
    tol: float = 1e-12
    max_iter: int = 25
    start: str = "cauchy"
    t0: float = 0.0
    snapshot_times: tuple = ()
    linear_reference: bool = True
    allow_shock: bool = False
    name: str = "custom"

    @property
    def settings(self):
        return StepSettings(self.cfl, self.b0, self.tol, self.max_iter, self.boundary)

    @property
    def grid(self):
        return Grid.from_bounds(self.lower, self.upper, self.spacing)

    def with_alpha(self, alpha):
        return replace(self, alpha=alpha)


@dataclass(eq=False)
class ExperimentResult:
    config: FDTDConfig
    grid: Grid
    terminal: WaveField
    linear_terminal: WaveField | None
    snapshots: list = field(default_factory=list)
    linear_snapshots: list = field(default_factory=list)
    wall_time: float = 0.0
    precheck: dict = field(default_factory=dict)

    @property
    def difference(self):
        if self.linear_terminal is None:
            return None
        return self.terminal.values() - self.linear_terminal.values()


def initial_data(config, grid=None):
    grid = config.grid if grid is None else grid
    pts = grid.points()
    w = np.asarray(config.direction, dtype=float)
    chi = config.envelope
    if config.start == "cauchy":
        p0 = 2 * config.h * chi(pts) * np.cos(pts @ w / config.h)
        return p0, np.zeros_like(p0), 0.0
    if config.start == "forward":
        d = handoff_data(chi, w, config.h, config.t0, pts)
        return d.p, d.q, config.t0
    raise DomainError(f"unknown start {config.start!r}")


def precheck(config):
    """No-shock and hyperbolicity checks on the initial data."""
    w = np.asarray(config.direction, dtype=float)
    chi_max = config.envelope.chi_max
    ns = no_shock_condition(config.alpha, chi_max, direction=w) if not isinstance(config.alpha, ZeroField) else None
    lhs = 0.0 if ns is None else ns.lhs
    amp = (2.0 if config.start == "cauchy" else 1.0) * config.h * chi_max
    a_max = float(np.abs(sample_alpha(config.alpha, config.grid)).max())
    margin = 1.0 - 2.0 * a_max * amp
    out = {"no_shock_lhs": lhs, "no_shock": lhs < 1.0, "hyperbolicity_margin": margin}
    if lhs >= 1.0 and not config.allow_shock:
        raise ShockError(
            f"no-shock condition fails: chi_max * max int alpha = {lhs:.4g} >= 1 (set allow_shock to override)"
        )
    if margin < config.b0:
        raise HyperbolicityError(f"initial data give 1 - 2 alpha p >= {margin:.4g}, below b0 = {config.b0}")
    return out


def _run_single(config, alpha, grid, n_steps, dt, snap_steps):
    p0, q0, t_start = initial_data(config, grid)
    settings = config.settings
    f = initialize(grid, p0, q0, alpha, dt, t_start, settings)
    snaps = []
    if 0 in snap_steps:
        snaps.append((t_start, p0.reshape(grid.shape).copy()))
    if 1 in snap_steps:
        snaps.append((f.t, f.values().copy()))

    def cb(fld):
        if fld.steps in snap_steps:
            snaps.append((fld.t, fld.values().copy()))

    advance(f, alpha, n_steps - 1, settings, cb if snap_steps else None)
    return f, snaps


def time_stepping(config, grid=None):
    grid = config.grid if grid is None else grid
    t_start = config.t0 if config.start == "forward" else 0.0
    span = config.T - t_start
    if span <= 0:
        raise DomainError("final time must exceed the start time")
    dt_max = max_stable_dt(grid, config.cfl, config.b0)
    n_steps = max(2, int(math.ceil(span / dt_max - 1e-9)))
    return n_steps, span / n_steps, t_start


def run_experiment(config, check=True):
    """Run a preset name or :class:`FDTDConfig` to its final time.

    Returns the terminal nonlinear field, the terminal ``alpha = 0`` field
    when ``linear_reference`` is set, and any requested snapshots.
    """
    if isinstance(config, str):
        from .config import preset_fdtd_config

        config = preset_fdtd_config(config)
    tic = time.perf_counter()
    grid = config.grid
    pre = precheck(config) if check else {}
    n_steps, dt, t_start = time_stepping(config, grid)
    snap_steps = {int(round((t - t_start) / dt)) for t in config.snapshot_times}
    terminal, snaps = _run_single(config, config.alpha, grid, n_steps, dt, snap_steps)
    lin, lin_snaps = None, []
    if config.linear_reference:
        lin, lin_snaps = _run_single(config, ZeroField(dim=grid.dim), grid, n_steps, dt, snap_steps)
    return ExperimentResult(config, grid, terminal, lin, snaps, lin_snaps, time.perf_counter() - tic, pre)


# -- asymptotic fields and remainder diagnostics ---------------------------------


def accumulated_along(alpha, y, direction, s, t_shift=0.0, n_quad=64):
    """``int_0^s alpha(y + (t_shift + sigma) omega) d sigma`` for each row of ``y`` (fixed Gauss-Legendre rule)."""
    xg, wg = np.polynomial.legendre.leggauss(n_quad)
    xg, wg = 0.5 * (xg + 1.0) * s, 0.5 * wg * s
    w = np.asarray(direction, dtype=float)
    pts = y[..., None, :] + (t_shift + xg)[:, None] * w
    return alpha.evaluate(pts) @ wg


def leading_order_field(config, t, grid=None, packets="both", panels=64):
    """``h U_0`` for the forward packet plus the linear two-term backward packet.

    ``s_tilde(y)`` is integrated with a composite Gauss-Legendre rule of
    ``panels`` panels along each ray.
    """
    grid = config.grid if grid is None else grid
    pts = grid.points().reshape(-1, grid.dim)
    w = np.asarray(config.direction, dtype=float)
    h = config.h
    t_start = config.t0 if config.start == "forward" else 0.0
    y = pts - t * w
    M = config.envelope(y)
    out = np.zeros(pts.shape[0])
    if packets in ("plus", "both"):
        active = np.abs(M) > 1e-14
        st = np.zeros(pts.shape[0])
        span = t - t_start
        edges = np.linspace(0.0, span, panels + 1)
        for a, b in zip(edges[:-1], edges[1:]):
            st[active] += accumulated_along(config.alpha, y[active] + t_start * w, w, b - a, t_shift=a, n_quad=8)
        if np.any(np.abs(M * st) >= 1):
            raise ShockError("leading profile has shocked by the requested time")
        theta = (-t + pts @ w) / h
        u = np.zeros(pts.shape[0])
        idx = np.flatnonzero(active)
        if idx.size:
            u[idx] = _solve_vec(M[idx], st[idx], np.mod(theta[idx], 2 * math.pi))
        out += h * u
    if packets in ("minus", "both") and config.start == "cauchy":
        out += two_term_field(config.envelope, w, h, t, pts, packets="minus")
    return out.reshape(grid.shape)


def _solve_vec(M, st, theta, max_iter=100):
    """Safeguarded Newton for ``u = M cos(theta - u s)`` with per-node ``M`` and ``s``."""
    a, b = -np.abs(M), np.abs(M)
    u = M * np.cos(theta)
    for _ in range(max_iter):
        arg = theta - u * st
        F = u - M * np.cos(arg)
        dF = 1.0 - M * st * np.sin(arg)
        a = np.where(F < 0, u, a)
        b = np.where(F > 0, u, b)
        if np.all(np.abs(F) <= 2.5e-13):
            break
        un = u - F / dF
        bad = ~np.isfinite(un) | (un <= a) | (un >= b)
        u = np.where(bad, 0.5 * (a + b), un)
    return u


def multi_indices(dim, m):
    return [g for g in product(range(m + 1), repeat=dim) if sum(g) <= m]


@dataclass(eq=False)
class ScaledNormReport:
    """Norms of ``(h d_x)^gamma u`` for ``|gamma| <= m`` at one time slice."""

    h: float
    m: int
    sup: dict
    l2: dict
    t: float = math.nan

    def sup_norm(self, order=None):
        """``sum_{|gamma| <= order} ||(h d)^gamma u||_inf``; ``order=0`` is the plain sup norm."""
        order = self.m if order is None else order
        return float(sum(v for g, v in self.sup.items() if sum(g) <= order))

    def l2_norm(self, order=None):
        order = self.m if order is None else order
        return float(sum(v for g, v in self.l2.items() if sum(g) <= order))


def scaled_norms(u, grid, h, m=2, mask=None, t=math.nan):
    """Sup and L2 norms of ``(h d)^gamma u`` by centred differences, restricted to ``mask``."""
    if m > 4:
        raise DomainError("scaled norms support m <= 4")
    u = np.asarray(u, dtype=float).reshape(grid.shape)
    if mask is None:
        mask = np.ones(grid.shape, dtype=bool)
    sup, l2 = {}, {}
    for g in multi_indices(grid.dim, m):
        d = u
        for ax, k in enumerate(g):
            for _ in range(k):
                d = h * np.gradient(d, grid.spacing[ax], axis=ax, edge_order=2)
        vals = d[mask]
        sup[g] = float(np.abs(vals).max()) if vals.size else 0.0
        l2[g] = float(math.sqrt(np.sum(vals**2) * grid.cell_volume))
    return ScaledNormReport(h, m, sup, l2, t)


def remainder_report(fields, asymptotics, hs, masks=None, m=2):
    """Scaled-norm reports of ``p_numeric - p_*`` along an h-ladder.

    Parameters
    ----------
    fields : sequence of WaveField
        Terminal numeric fields, one per ``h``.
    asymptotics : sequence of ndarray
        ``p_*`` sampled on the matching grids.
    hs : sequence of float
    masks : sequence of bool arrays, optional
        Regions where the norms are taken.

    Returns
    -------
    reports : list of ScaledNormReport
    orders : ndarray
        ``log(err_i / err_{i+1}) / log(h_i / h_{i+1})`` of the plain sup norms.
    """
    reports = []
    for i, (f, ps, h) in enumerate(zip(fields, asymptotics, hs)):
        ps = np.asarray(ps, dtype=float)
        if ps.shape != f.grid.shape:
            raise AlignmentError(f"asymptotic field shape {ps.shape} does not match grid {f.grid.shape}")
        mask = None if masks is None else masks[i]
        reports.append(scaled_norms(f.values() - ps, f.grid, h, m, mask, f.t))
    return reports, observed_orders(reports, hs)


def observed_orders(reports, hs, order=0):
    errs = np.array([r.sup_norm(order) for r in reports])
    hs = np.asarray(hs, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(errs[:-1] / errs[1:]) / np.log(hs[:-1] / hs[1:])


def ladder(config, hs, dx_power=2.0):
    """Configs for an h-ladder with spacing scaled by ``(h/h_0)^dx_power`` along every axis."""
    h0 = config.h
    return [
        replace(config, h=h, spacing=tuple(d * (h / h0) ** dx_power for d in config.spacing), snapshot_times=())
        for h in hs
    ]
