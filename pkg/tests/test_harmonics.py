import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from westervelt.errors import DataError, DomainError, ShockError
from westervelt.harmonics import (
    HarmonicSpectrum,
    evolve_spectrum,
    profile_to_spectrum,
    second_harmonic_linearized,
    spectrum_to_profile,
)
from westervelt.profile_core import PhaseProfile, solve_implicit, theta_grid


def test_initial_spectrum():
    spec = evolve_spectrum(1.7, 0.0, 8)
    assert spec[1] == spec[-1] == pytest.approx(0.85)
    assert np.count_nonzero(spec.coefficients) == 2


@pytest.mark.parametrize("M, s", [(1.0, 0.3), (2.0, 0.1), (0.5, 0.6)])
def test_spectrum_matches_implicit(M, s):
    prof = spectrum_to_profile(evolve_spectrum(M, s, 32))
    assert np.abs(prof.values - solve_implicit(M, s, prof.theta)).max() < 1e-6


@given(st.floats(0.2, 2.0), st.floats(0.0, 0.8))
def test_hermitian_and_zero_mode(M, f):
    spec = evolve_spectrum(M, f / M, 16, debug=True)
    assert spec.symmetry_defect() < 1e-10
    assert abs(spec[0]) < 1e-10


def test_second_harmonic_initial_slope():
    s = 1e-4
    spec = evolve_spectrum(1.0, s, 8, steps=1)
    assert (spec[2] / s).imag == pytest.approx(-0.25, rel=1e-3)


def test_second_harmonic_remainder_is_cubic():
    s = np.logspace(-3, -1, 7)
    err = [abs(evolve_spectrum(1.0, x, 16)[2] + 0.25j * x) for x in s]
    slope = np.polyfit(np.log(s), np.log(err), 1)[0]
    assert slope > 2.7


@pytest.mark.parametrize("M, s", [(1.0, 0.3), (1.0, 0.5), (2.0, 0.2)])
def test_truncation_convergence(M, s):
    ref = spectrum_to_profile(evolve_spectrum(M, s, 64)).values
    e16 = np.abs(spectrum_to_profile(evolve_spectrum(M, s, 16)).values - ref).max()
    e32 = np.abs(spectrum_to_profile(evolve_spectrum(M, s, 32)).values - ref).max()
    assert e32 <= 0.1 * e16 or e32 < 1e-13


@pytest.mark.parametrize("M, x, expected", [(1.0, 0.0, 0.0), (1.0, 0.1, 0.05), (2.0, 0.25, 0.5)])
def test_second_harmonic_linearized(M, x, expected):
    assert second_harmonic_linearized(M, x) == pytest.approx(expected)


def test_spectrum_to_profile_cosine():
    c = np.zeros(5, dtype=complex)
    c[1] = c[3] = 0.5
    prof = spectrum_to_profile(HarmonicSpectrum(c), 64)
    assert np.allclose(prof.values, np.cos(theta_grid(64)), atol=1e-14)


def test_second_harmonic_profile():
    M, s = 1.5, 0.01
    c = np.zeros(5, dtype=complex)
    c[4] = -0.25j * M * M * s
    c[0] = np.conj(c[4])
    prof = spectrum_to_profile(HarmonicSpectrum(c), 64)
    assert np.allclose(prof.values, 0.5 * M * M * s * np.sin(2 * theta_grid(64)), atol=1e-14)


def test_round_trip():
    prof = PhaseProfile(solve_implicit(1.0, 0.4, theta_grid(256)))
    back = spectrum_to_profile(profile_to_spectrum(prof, 127), 256)
    assert np.abs(back.values - prof.values).max() < 1e-10


def test_records_round_trip():
    spec = evolve_spectrum(1.0, 0.2, 6)
    again = HarmonicSpectrum.from_records(spec.to_records(), spec.s_tilde, spec.M)
    assert np.array_equal(again.coefficients, spec.coefficients)


def test_sin_cos_coefficients():
    prof = PhaseProfile(0.3 * np.sin(2 * theta_grid(64)) + 0.2 * np.cos(3 * theta_grid(64)))
    spec = profile_to_spectrum(prof, 8)
    assert spec.sin_coefficient(2) == pytest.approx(0.3)
    assert spec.cos_coefficient(3) == pytest.approx(0.2)


def test_errors():
    with pytest.raises(DomainError):
        evolve_spectrum(1.0, 0.1, 1)
    with pytest.raises(ShockError):
        evolve_spectrum(1.0, 1.0, 8)
    with pytest.raises(DataError):
        HarmonicSpectrum(np.zeros(4))
    bad = np.zeros(5, dtype=complex)
    bad[1] = 1.0
    with pytest.raises(DataError):
        spectrum_to_profile(HarmonicSpectrum(bad))
    with pytest.raises(DataError):
        HarmonicSpectrum(bad).check()


def test_fixed_step_default():
    spec = evolve_spectrum(1.0, 0.05, 8)
    ref = evolve_spectrum(1.0, 0.05, 8, steps=500)
    assert np.abs(spec.coefficients - ref.coefficients).max() < 1e-12
    assert math.isclose(spec.s_tilde, 0.05)
