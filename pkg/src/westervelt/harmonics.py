"""Fourier-mode hierarchy of the leading profile equation.

Writing ``U = sum_k u_k e^{i k theta}`` turns ``U_s + U U_theta = 0`` into

    du_k/ds = -(i/2) k sum_{k1 + k2 = k} u_{k1} u_{k2},

started from ``u_{+-1} = M/2``.  The system is truncated at ``|k| <= K``.
Variable nonlinearity enters only through the accumulated parameter
``s_tilde``, so the hierarchy is always integrated in ``s_tilde``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DomainError, ShockError
from .profile_core import PhaseProfile, theta_grid

DEFAULT_STEP = 1e-3
SYMMETRY_TOL = 1e-10


def _debug_enabled():
    return os.environ.get("WESTERVELT_DEBUG", "") not in ("", "0")


@dataclass(eq=False)
class HarmonicSpectrum:
    """Coefficients ``u_k`` for ``-K <= k <= K``, stored at index ``k + K``."""

    coefficients: np.ndarray
    s_tilde: float = 0.0
    M: float = math.nan

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.ndim != 1 or c.size % 2 != 1:
            raise DataError("spectrum needs an odd number of coefficients (-K..K)")
        self.coefficients = c

    @property
    def K(self):
        return (self.coefficients.size - 1) // 2

    @property
    def modes(self):
        return np.arange(-self.K, self.K + 1)

    def __getitem__(self, k):
        if abs(k) > self.K:
            return 0.0 + 0.0j
        return self.coefficients[k + self.K]

    def sin_coefficient(self, k):
        """Coefficient of ``sin(k theta)`` in the real profile, ``-2 Im u_k``."""
        return -2.0 * self[k].imag

    def cos_coefficient(self, k):
        return 2.0 * self[k].real

    def symmetry_defect(self):
        c = self.coefficients
        return float(np.abs(c - np.conj(c[::-1])).max())

    def check(self, tol=SYMMETRY_TOL):
        """Raise ``DataError`` unless Hermitian with a vanishing zeroth mode."""
        if self.symmetry_defect() > tol:
            raise DataError(f"spectrum violates u_(-k) = conj(u_k) by {self.symmetry_defect():.3e}")
        if abs(self[0]) > tol:
            raise DataError(f"spectrum has a zeroth mode of size {abs(self[0]):.3e}")

    def to_records(self):
        """Rows ``[k, Re u_k, Im u_k]``."""
        return [[int(k), float(c.real), float(c.imag)] for k, c in zip(self.modes, self.coefficients)]

    @classmethod
    def from_records(cls, rows, s_tilde=0.0, M=math.nan):
        rows = sorted(rows, key=lambda r: r[0])
        ks = [int(r[0]) for r in rows]
        K = max(abs(k) for k in ks)
        c = np.zeros(2 * K + 1, dtype=complex)
        for k, re, im in rows:
            c[int(k) + K] = complex(re, im)
        return cls(c, s_tilde, M)

    @classmethod
    def initial(cls, M, K):
        c = np.zeros(2 * K + 1, dtype=complex)
        c[K - 1] = c[K + 1] = M / 2
        return cls(c, 0.0, M)


def _rhs(u, k):
    K = (u.size - 1) // 2
    conv = np.convolve(u, u)[K : 3 * K + 1]
    return -0.5j * k * conv


def evolve_spectrum(M, s_tilde, K=32, steps=None, debug=None):
    """Integrate the truncated mode hierarchy by RK4 up to ``s_tilde``.

    Parameters
    ----------
    M : float
        Initial amplitude, ``u_{+-1}(0) = M/2``.
    s_tilde : float
        Final accumulated nonlinearity; needs ``M s_tilde < 1``.
    K : int
        Truncation order, at least 2.
    steps : int, optional
        Number of RK4 steps; default keeps the step at ``1e-3``.
    debug : bool, optional
        Assert Hermitian symmetry and a vanishing zeroth mode after each
        step.  Defaults to the ``WESTERVELT_DEBUG`` environment variable.

    Raises
    ------
    ShockError
        When ``|M s_tilde| >= 1`` or the coefficient norm exceeds ``10 |M|``.
    """
    if K < 2:
        raise DomainError("truncation order K must be at least 2")
    if abs(M * s_tilde) >= 1:
        raise ShockError(f"|M s_tilde| = {abs(M * s_tilde):.6g} >= 1", s_tilde=s_tilde)
    if steps is None:
        steps = max(1, int(math.ceil(abs(s_tilde) / DEFAULT_STEP - 1e-9)))
    if steps < 1:
        raise DomainError("steps must be at least 1")
    debug = _debug_enabled() if debug is None else debug
    spec = HarmonicSpectrum.initial(M, K)
    u = spec.coefficients
    k = np.arange(-K, K + 1)
    ds = s_tilde / steps
    bound = 10.0 * abs(M)
    for i in range(steps):
        k1 = _rhs(u, k)
        k2 = _rhs(u + 0.5 * ds * k1, k)
        k3 = _rhs(u + 0.5 * ds * k2, k)
        k4 = _rhs(u + ds * k3, k)
        u = u + ds / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if np.linalg.norm(u) > bound or not np.all(np.isfinite(u)):
            raise ShockError(f"spectral blow-up at s_tilde = {(i + 1) * ds:.6g}", s_tilde=(i + 1) * ds)
        if debug:
            HarmonicSpectrum(u).check()
    return HarmonicSpectrum(u, float(s_tilde), M)


def second_harmonic_linearized(M, xray):
    """Coefficient ``(M^2 / 2) * xray`` of ``sin 2 theta`` at first order in the nonlinearity."""
    return 0.5 * M * M * xray


def spectrum_to_profile(spec, n_theta=1024):
    """Real profile ``sum_k u_k e^{i k theta}`` on the uniform grid."""
    if spec.symmetry_defect() > SYMMETRY_TOL:
        raise DataError(f"spectrum violates Hermitian symmetry by {spec.symmetry_defect():.3e}")
    c = np.zeros(n_theta, dtype=complex)
    np.add.at(c, np.mod(spec.modes, n_theta), spec.coefficients)
    z = np.fft.ifft(c) * n_theta
    if np.abs(z.imag).max() > SYMMETRY_TOL:
        raise DataError(f"synthesised profile has imaginary residue {np.abs(z.imag).max():.3e}")
    return PhaseProfile(z.real, M=spec.M, s_tilde=spec.s_tilde)


def profile_to_spectrum(profile, K):
    """Discrete Fourier projection of a profile onto ``|k| <= K``."""
    n = profile.n_theta
    if 2 * K >= n:
        raise DomainError("K must be below n_theta / 2")
    c = np.fft.fft(profile.values) / n
    idx = np.mod(np.arange(-K, K + 1), n)
    return HarmonicSpectrum(c[idx], profile.s_tilde, profile.M)
