import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from westervelt.errors import DomainError, ShockError
from westervelt.linear_go import BeamEnvelope, ConstantProfile, GaussianProfile, PlateauProfile
from westervelt.nonlinearity import ConstantField, GaussianField, Ray, ZeroField
from westervelt.profile_core import (
    PhaseProfile,
    derivative_margin,
    evolve_characteristics,
    evolve_profile,
    fourier_interpolate,
    fourier_upsample,
    shock_onset_probe,
    solve_U1,
    solve_implicit,
    spectral_antiderivative,
    spectral_derivative,
    theta_grid,
)

amps = st.floats(0.1, 3.0)
fracs = st.floats(0.0, 0.95)
thetas = st.floats(-10.0, 10.0)


def _brent(M, s, th):
    return brentq(lambda u: u - M * math.cos(th - u * s), -abs(M) - 1e-12, abs(M) + 1e-12, xtol=1e-15)


@given(amps, fracs, thetas)
def test_implicit_matches_brent(M, f, th):
    s = f / M
    assert float(solve_implicit(M, s, th)) == pytest.approx(_brent(M, s, th), abs=1e-12)


@pytest.mark.parametrize("M, s", [(1.0, 0.0), (2.0, 0.0), (0.7, 0.0)])
def test_zero_s_is_cosine(M, s):
    th = theta_grid(64)
    assert np.allclose(solve_implicit(M, s, th), M * np.cos(th), atol=1e-15)


@given(amps, fracs)
def test_implicit_periodicity(M, f):
    th = np.linspace(0, 2 * math.pi, 33)
    assert np.abs(solve_implicit(M, f / M, th) - solve_implicit(M, f / M, th + 2 * math.pi)).max() < 1e-12


@pytest.mark.parametrize("M, s", [(1.0, 1.0), (2.0, 0.6), (1.0, -1.2)])
def test_implicit_refuses_post_shock(M, s):
    with pytest.raises(ShockError):
        solve_implicit(M, s, 0.0)


def test_crest_moves_by_M_s():
    # level-set transport for the crest q = 0
    M, s = 1.3, 0.5
    th = M * s
    assert float(solve_implicit(M, s, th)) == pytest.approx(M, abs=1e-12)


@given(amps, fracs, st.floats(0.0, 2 * math.pi))
def test_level_set_transport(M, f, q):
    s = f / M
    k = M * math.cos(q)
    assert float(solve_implicit(M, s, q + k * s)) == pytest.approx(k, abs=1e-11)


@pytest.mark.parametrize("M", [0.4, 1.0, 2.5])
@pytest.mark.parametrize("f", [0.1, 0.5, 0.9])
def test_implicit_vs_characteristics(M, f):
    s = f / M
    n = 1024
    fan = evolve_characteristics(PhaseProfile.cosine(M, n), s)
    assert fan.is_monotone()
    assert np.abs(fan.to_profile().values - solve_implicit(M, s, theta_grid(n))).max() < 1e-8


def test_fan_positions_follow_characteristics():
    fan = evolve_characteristics(PhaseProfile.cosine(1.0, 256), 0.4)
    assert np.allclose(fan.positions, fan.seeds + fan.values * 0.4, atol=0)
    assert np.allclose(fan.values, np.cos(fan.seeds), atol=1e-13)


def test_characteristics_detect_fold():
    with pytest.raises(ShockError):
        evolve_characteristics(PhaseProfile.cosine(1.0, 256), 1.05)


@pytest.mark.parametrize("M, f", [(1.0, 0.3), (2.0, 0.45), (0.5, 0.8)])
def test_zero_mean_and_sup_norm(M, f):
    u = solve_implicit(M, f / M, theta_grid(2048))
    assert abs(u.mean()) < 1e-8
    assert np.abs(u).max() <= M + 1e-12
    assert np.abs(u).max() > M * (1 - 1e-5)


@pytest.mark.parametrize("M", [0.5, 1.0, 2.0])
def test_shock_onset_probe(M):
    assert shock_onset_probe(M) == pytest.approx(1.0 / M, abs=1e-3)


def test_derivative_margin_sign():
    assert derivative_margin(1.0, 0.9) > 0
    assert derivative_margin(1.0, 1.1) < 0


def test_evolve_profile_constant_alpha():
    prof = evolve_profile(ConstantField(1.0), Ray([0.0], [1.0]), 1.0, 0.6, 512)
    assert prof.s_tilde == pytest.approx(0.6, abs=1e-12)
    assert np.allclose(prof.values, solve_implicit(1.0, 0.6, prof.theta), atol=1e-14)


def test_evolve_profile_rejects_negative_distance():
    with pytest.raises(DomainError):
        evolve_profile(ConstantField(1.0), Ray([0.0], [1.0]), 1.0, -0.1)


def test_spectral_helpers_on_trig_data():
    th = theta_grid(128)
    v = np.sin(3 * th) + 0.5 * np.cos(th)
    assert np.allclose(spectral_derivative(v), 3 * np.cos(3 * th) - 0.5 * np.sin(th), atol=1e-12)
    anti = spectral_antiderivative(np.cos(2 * th))
    assert np.allclose(anti - anti.mean(), 0.5 * np.sin(2 * th), atol=1e-12)
    up = fourier_upsample(v, 4)
    assert np.allclose(up, np.sin(3 * theta_grid(512)) + 0.5 * np.cos(theta_grid(512)), atol=1e-12)
    pts = np.array([0.1, 1.7, 5.9])
    assert np.allclose(fourier_interpolate(v, pts), np.sin(3 * pts) + 0.5 * np.cos(pts), atol=1e-12)


def test_phase_profile_rejects_bad_values():
    with pytest.raises(DomainError):
        PhaseProfile(np.zeros((4, 4)))


# -- second profile term ---------------------------------------------------------------


def test_U1_vanishes_for_transversally_flat_beam():
    chi = BeamEnvelope(PlateauProfile(-0.6, 0.2, 0.03), (ConstantProfile(1.0),))
    pts = np.array([[0.0, 0.2], [0.3, 0.35]])
    res = solve_U1(ZeroField(dim=2), chi, [0.0, 1.0], 0.1, 0.9, pts, n_theta=64, steps=16)
    assert np.abs(res.values).max() < 1e-6


def test_U1_matches_linear_corrector():
    # alpha = 0: U_1 = -(t/2) Lap' chi(x - t omega) sin(theta)
    chi = BeamEnvelope(PlateauProfile(-0.6, 0.2, 0.05), (GaussianProfile(0.0, 0.3),))
    w = np.array([0.0, 1.0])
    t0, T = 0.05, 0.7
    pts = np.array([[0.1, 0.1], [-0.2, 0.05], [0.25, 0.2]])
    res = solve_U1(ZeroField(dim=2), chi, w, t0, T, pts, n_theta=64, steps=32)
    lap = chi.transverse_laplacian(pts - T * w, w)
    oracle = -(T / 2) * lap[:, None] * np.sin(res.theta)[None, :]
    assert np.abs(res.values - oracle).max() < 1e-4 * max(1.0, np.abs(oracle).max())


def test_U1_zero_mean_switch():
    chi = BeamEnvelope(PlateauProfile(-0.9, 0.2, 0.05), (GaussianProfile(0.0, 0.3),))
    alpha = GaussianField(1.0, 0.3, (0.0, 0.0), dim=2)
    pts = np.array([[0.05, 0.1]])
    res = solve_U1(alpha, chi, [0.0, 1.0], 0.05, 1.0, pts, n_theta=64, steps=24, beta1="zero_mean")
    assert abs(res.values.mean()) < 1e-4
    with pytest.raises(DomainError):
        solve_U1(alpha, chi, [0.0, 1.0], 0.05, 1.0, pts, beta1="other")
