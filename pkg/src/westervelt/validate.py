"""Cross-method invariant suite behind the ``validate`` command.

Each check returns an :class:`InvariantResult`; :func:`run_suite` collects
them and :func:`format_table` renders the pass/fail table.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .harmonics import evolve_spectrum, profile_to_spectrum, spectrum_to_profile
from .nonlinearity import GaussianField, MovedField, Ray, RigidMotion, line_integral, planar_rotation
from .profile_core import PhaseProfile, evolve_characteristics, solve_implicit, theta_grid
from .tomography import (
    ProfileAcquisition,
    assemble_sinogram,
    level_spread,
    measure_tilt,
    profile_zeros,
    ray_geometry,
    reconstruct,
)

PHANTOM = GaussianField(0.8, 0.25, (0.15, -0.1), dim=2)


@dataclass(frozen=True)
class InvariantResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    seconds: float = 0.0
    detail: str = ""

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<34s} {self.value:11.3e}  (tol {self.tolerance:.1e})  {self.seconds:6.2f}s  {self.detail}"


def _timed(name, tol, func, detail=""):
    tic = time.perf_counter()
    value = float(func())
    ok = math.isfinite(value) and value < tol
    return InvariantResult(name, ok, value, tol, time.perf_counter() - tic, detail)


def _lattice(n, top):
    Ms = np.linspace(0.2, 2.0, n)
    pairs = []
    for M in Ms:
        for f in np.linspace(0.05, top, n):
            pairs.append((float(M), float(f / M)))
    return pairs


def hermitian_symmetry(K=32, n=4):
    """Largest ``|u_{-k} - conj(u_k)|`` after evolving a small lattice."""
    return max(evolve_spectrum(M, s, K).symmetry_defect() for M, s in _lattice(n, 0.8))


def zero_mean_mode(K=32, n=4, n_theta=1024):
    """Largest zeroth spectral mode and profile mean across the three solvers."""
    worst = 0.0
    for M, s in _lattice(n, 0.8):
        worst = max(worst, abs(evolve_spectrum(M, s, K)[0]))
        th = theta_grid(n_theta)
        worst = max(worst, abs(np.mean(solve_implicit(M, s, th))))
        fan = evolve_characteristics(PhaseProfile.cosine(M, n_theta), s)
        worst = max(worst, abs(fan.to_profile().mean()))
    return worst


def zero_level_fixity(n_theta=1024):
    """Zero displacement relative to the grid step, plus the tilt at a tiny level."""
    worst = 0.0
    ref = PhaseProfile.cosine(1.0, n_theta)
    z_ref = profile_zeros(ref)
    for s in (0.2, 0.5, 0.8):
        prof = PhaseProfile(solve_implicit(1.0, s, theta_grid(n_theta)), M=1.0, s_tilde=s)
        z = profile_zeros(prof)
        worst = max(worst, float(np.abs(np.sort(z) - np.sort(z_ref)).max()))
        (m,) = measure_tilt(prof, ref, [1e-4])
        worst = max(worst, abs(m.shift))
    return worst / (2 * math.pi / n_theta)


def level_independence(n_theta=1024):
    """Relative spread of recovered ``d/k`` across the default levels."""
    worst = 0.0
    ref = PhaseProfile.cosine(1.0, n_theta)
    for s in (0.1, 0.3, 0.6, 0.85):
        prof = PhaseProfile(solve_implicit(1.0, s, theta_grid(n_theta)), M=1.0, s_tilde=s)
        worst = max(worst, level_spread(measure_tilt(prof, ref)))
    return worst


def sinogram_moment(n_angles=24, n_offsets=96, half_width=1.6):
    """Relative spread of the offset-moment of the exact phantom sinogram over angle."""
    sino = assemble_sinogram(PHANTOM, n_angles, n_offsets, "exact", half_width=half_width, truth=False)
    m = sino.moment0()
    return float(np.ptp(m) / abs(m.mean()))


def sinogram_moment_profile(n_angles=8, n_offsets=48, half_width=1.6):
    """Same moment condition on a profile-mode sinogram."""
    sino = assemble_sinogram(
        PHANTOM, n_angles, n_offsets, "profile", half_width=half_width, radius=1.6, profile=ProfileAcquisition(n_theta=512), truth=False
    )
    m = sino.moment0()
    return float(np.ptp(m) / abs(m.mean()))


def fbp_linearity(a=-2.75):
    """``max |R(a g) - a R(g)| / max |a R(g)|`` for FBP and the ridge solver."""
    sino = assemble_sinogram(PHANTOM, 16, 32, "exact", truth=False)
    worst = 0.0
    for method in ("fbp", "ridge"):
        r1 = reconstruct(sino, n=48, method=method).values
        r2 = reconstruct(sino.scaled(a), n=48, method=method).values
        worst = max(worst, float(np.abs(r2 - a * r1).max() / np.abs(a * r1).max()))
    return worst


def implicit_vs_characteristics(n=10, n_theta=1024):
    worst = 0.0
    th = theta_grid(n_theta)
    for M, s in _lattice(n, 0.9):
        u = solve_implicit(M, s, th)
        v = evolve_characteristics(PhaseProfile.cosine(M, n_theta), s).to_profile().values
        worst = max(worst, float(np.abs(u - v).max()))
    return worst


def implicit_periodicity():
    th = np.linspace(0, 2 * math.pi, 257)
    return max(float(np.abs(solve_implicit(M, s, th) - solve_implicit(M, s, th + 2 * math.pi)).max()) for M, s in _lattice(4, 0.9))


def sup_norm_preservation(n_theta=4096):
    worst = 0.0
    for M, s in _lattice(4, 0.9):
        prof = evolve_characteristics(PhaseProfile.cosine(M, n_theta), s)
        worst = max(worst, abs(float(np.abs(prof.values).max()) - M))
    return worst


def truncation_convergence():
    """Largest ratio ``|U_2K - U_4K| / |U_K - U_4K|`` for ``M s <= 0.5``, ``K >= 16``; must stay below 0.1."""
    worst = 0.0
    for M, s in [(1.0, 0.3), (1.0, 0.5), (2.0, 0.2), (0.5, 0.9)]:
        ref = spectrum_to_profile(evolve_spectrum(M, s, 64)).values
        e16 = np.abs(spectrum_to_profile(evolve_spectrum(M, s, 16)).values - ref).max()
        e32 = np.abs(spectrum_to_profile(evolve_spectrum(M, s, 32)).values - ref).max()
        worst = max(worst, float(e32 / max(e16, 1e-300)) if e16 > 1e-13 else 0.0)
    return worst


def spectrum_round_trip(n_theta=1024):
    prof = PhaseProfile(solve_implicit(1.0, 0.3, theta_grid(n_theta)), M=1.0, s_tilde=0.3)
    back = spectrum_to_profile(profile_to_spectrum(prof, n_theta // 2 - 1), n_theta)
    return float(np.abs(back.values - prof.values).max())


def motion_invariance():
    """Line integrals along mapped rays agree with the moved field's integrals."""
    motion = RigidMotion(np.array([0.3]), planar_rotation(0.7))
    moved = MovedField(PHANTOM, motion)
    worst = 0.0
    for angle, offset in [(0.0, 0.1), (0.9, -0.3), (2.2, 0.45)]:
        n, w = ray_geometry(angle, offset)
        ray = Ray(offset * n, w)
        lhs = line_integral(moved, ray)
        B, sh = motion.rotation, motion.full_shift
        mapped = Ray((ray.base + sh) @ B.T, w @ B.T)
        worst = max(worst, abs(lhs - line_integral(PHANTOM, mapped)))
    return worst


def sinogram_symmetry():
    """``g(angle + pi, -s) = g(angle, s)`` on quadrature integrals."""
    worst = 0.0
    for angle in (0.2, 1.1, 2.5):
        for s in (-0.6, 0.05, 0.4):
            n, w = ray_geometry(angle, s)
            n2, w2 = ray_geometry(angle + math.pi, -s)
            worst = max(worst, abs(line_integral(PHANTOM, Ray(s * n, w)) - line_integral(PHANTOM, Ray(-s * n2, w2))))
    return worst


CORE = (
    ("hermitian symmetry", 1e-10, hermitian_symmetry),
    ("zero mean mode", 1e-8, zero_mean_mode),
    ("zero-level fixity [grid steps]", 1.0, zero_level_fixity),
    ("level independence (profile)", 1e-6, level_independence),
    ("sinogram moment (exact)", 1e-6, sinogram_moment),
    ("sinogram moment (profile)", 1e-6, sinogram_moment_profile),
    ("FBP/ridge linearity", 1e-10, fbp_linearity),
)

EXTENDED = (
    ("implicit vs characteristics", 1e-8, implicit_vs_characteristics),
    ("implicit periodicity", 1e-12, implicit_periodicity),
    ("sup-norm preservation", 1e-10, sup_norm_preservation),
    ("truncation convergence ratio", 0.1, truncation_convergence),
    ("spectrum round trip", 1e-10, spectrum_round_trip),
    ("motion invariance", 1e-9, motion_invariance),
    ("sinogram symmetry", 1e-9, sinogram_symmetry),
)


def run_suite(quick=False):
    """Run the core checks, plus the extended ones unless ``quick``."""
    checks = CORE if quick else CORE + EXTENDED
    return [_timed(name, tol, func) for name, tol, func in checks]


def format_table(results):
    lines = [r.line() for r in results]
    n_ok = sum(r.passed for r in results)
    lines.append(f"{n_ok}/{len(results)} invariants passed")
    return "\n".join(lines)
