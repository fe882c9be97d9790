import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from westervelt.errors import DomainError, GeometryError
from westervelt.linear_go import (
    BeamEnvelope,
    ConstantProfile,
    FunctionEnvelope,
    GaussianProfile,
    PlateauProfile,
    PolynomialProfile,
    amplitudes,
    default_t0,
    first_corrector,
    handoff_data,
    leading_amplitudes,
    two_term_field,
)

CHI2 = BeamEnvelope(PlateauProfile(-0.9, 0.25, 0.05), (GaussianProfile(0.05, 0.3),))
W2 = np.array([0.0, 1.0])


def _pts(n=40, seed=0):
    return np.random.default_rng(seed).uniform([-0.6, -1.3], [0.6, -0.5], (n, 2))


def test_leading_amplitudes_at_zero_time():
    x = _pts()
    a, b = leading_amplitudes(CHI2, W2, 0.0, x)
    assert np.array_equal(a, CHI2(x)) and np.array_equal(b, CHI2(x))


def test_leading_amplitudes_translate():
    x = _pts()
    a, b = leading_amplitudes(CHI2, W2, 1.0, x)
    assert np.allclose(a, CHI2(x - W2)) and np.allclose(b, CHI2(x + W2))


def test_plateau_core_gives_unit_amplitude():
    chi = BeamEnvelope(PlateauProfile(0.0, 0.5, 0.02), (ConstantProfile(1.0),))
    x = np.array([[0.3, 0.7 + 0.1], [-2.0, 0.7 - 0.2]])
    a, _ = leading_amplitudes(chi, W2, 0.7, x)
    assert np.allclose(a, 1.0, atol=1e-12)


def test_first_corrector_vanishes_at_zero_time():
    assert np.all(first_corrector(CHI2, W2, 0.0, _pts()) == 0)


def test_first_corrector_quadratic_transverse_profile():
    # g(x') = 1 + 0.5 x'^2 gives Lap' g = 1
    w_prof = GaussianProfile(-0.5, 0.2)
    chi = BeamEnvelope(w_prof, (PolynomialProfile((1.0, 0.0, 0.5)),))
    x = _pts()
    t = 0.4
    oracle = 0.5j * t * 1.0 * w_prof.derivative(x[:, 1] - t)
    assert np.allclose(first_corrector(chi, W2, t, x), oracle, atol=1e-13)


def test_first_corrector_flat_transverse_is_zero():
    chi = BeamEnvelope(PlateauProfile(-0.5, 0.2, 0.05), (ConstantProfile(1.0),))
    assert np.abs(first_corrector(chi, W2, 0.8, _pts())).max() == 0


def test_closed_form_matches_finite_differences():
    fd = FunctionEnvelope(CHI2, 2, (-3, -3), (3, 3), CHI2.chi_max)
    x = _pts()
    assert np.allclose(fd.transverse_laplacian(x, W2), CHI2.transverse_laplacian(x, W2), atol=1e-6 * 50)
    assert np.allclose(fd.directional_derivative(x, W2), CHI2.directional_derivative(x, W2), atol=1e-7 * 50)


@given(st.floats(0.0, 2 * math.pi))
def test_rotated_frame_closed_form_and_differences(angle):
    R = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    chi = BeamEnvelope(PlateauProfile(0.0, 0.3, 0.08), (GaussianProfile(0.0, 0.4),), frame=R)
    w = R[:, -1]
    x = np.random.default_rng(1).uniform(-0.5, 0.5, (10, 2))
    z = x @ R
    g, f = GaussianProfile(0.0, 0.4), PlateauProfile(0.0, 0.3, 0.08)
    exact = g.derivative(z[:, 0], 2) * f.derivative(z[:, 1])
    assert np.allclose(chi.transverse_laplacian(x, w), exact, atol=1e-8)
    fd = FunctionEnvelope(chi, 2, (-3, -3), (3, 3), 1.0)
    assert np.allclose(fd.transverse_laplacian(x, w), exact, atol=1e-5)


def test_transport_equations_hold():
    t, x, e = 0.5, _pts(), 1e-4
    ap = lambda t, x: amplitudes(CHI2, W2, t, x)  # noqa: E731
    dt_a0 = (ap(t + e, x + e * W2).a_plus_0 - ap(t - e, x - e * W2).a_plus_0) / (2 * e)
    assert np.abs(dt_a0).max() < 1e-10
    dt_a1 = (ap(t + e, x + e * W2).a_plus_1 - ap(t - e, x - e * W2).a_plus_1) / (2 * e)
    box_a0 = -CHI2.transverse_laplacian(x - t * W2, W2)
    assert np.allclose(dt_a1, box_a0 / 2j, atol=1e-6)


def test_reality_pattern():
    amp = amplitudes(CHI2, W2, 0.6, _pts())
    assert np.isrealobj(amp.a_plus_0)
    assert np.all(amp.a_plus_1.real == 0) and np.all(amp.a_minus_1.real == 0)


@pytest.mark.parametrize("h", [0.05, 0.02, 0.01])
def test_handoff_sup_bound(h):
    x = np.stack(np.meshgrid(np.linspace(-1, 1, 80), np.linspace(-1.6, 0.0, 400), indexing="ij"), -1).reshape(-1, 2)
    t0 = 0.05
    d = handoff_data(CHI2, W2, h, t0, x)
    a1 = np.abs(first_corrector(CHI2, W2, t0, x)).max()
    assert np.abs(d.p).max() <= h * (CHI2.chi_max + h * a1) + 1e-15


def test_handoff_velocity_is_time_derivative():
    h, t0, e = 0.03, 0.1, 1e-5
    x = _pts(60, 3)
    d = handoff_data(CHI2, W2, h, t0, x)
    fd = (two_term_field(CHI2, W2, h, t0 + e, x, "plus") - two_term_field(CHI2, W2, h, t0 - e, x, "plus")) / (2 * e)
    assert np.allclose(d.p, two_term_field(CHI2, W2, h, t0, x, "plus"), atol=1e-15)
    assert np.allclose(d.q, fd, atol=1e-6)


def test_handoff_contains_first_harmonic_only():
    from westervelt.tomography import demodulate

    chi = BeamEnvelope(PlateauProfile(0.0, 1.0, 0.05), (GaussianProfile(0.0, 0.5),))
    h, t0 = 0.02, 0.05
    y = np.linspace(-0.3, 0.3, 1200)
    x = np.stack([np.full_like(y, 0.1), y], -1)
    p = handoff_data(chi, W2, h, t0, x).p
    dm = demodulate(-t0 + y, p, h, K=6)
    c = dm.spectrum.coefficients
    K = dm.spectrum.K
    higher = np.abs(np.concatenate([c[: K - 1], c[K + 2 :]])).max()
    assert higher < 1e-8
    assert abs(c[K + 1]) > 0.2


def test_default_t0_is_half_gap():
    chi = BeamEnvelope(PlateauProfile(-2.0, 0.3, 0.02))
    R = 1.0
    gap = chi.distance_to_ball(R)
    assert default_t0(chi, R, [1.0]) == pytest.approx(0.5 * gap)
    assert gap == pytest.approx(2.0 - 0.3 - 5.1 * 0.02 - R)


def test_support_checks():
    chi = BeamEnvelope(PlateauProfile(-0.5, 0.3, 0.02))
    with pytest.raises(GeometryError):
        default_t0(chi, 1.0, [1.0])
    with pytest.raises(GeometryError):
        handoff_data(BeamEnvelope(PlateauProfile(-2.0, 0.3, 0.02)), [1.0], 0.02, 0.8, np.zeros((1, 1)), radius=1.0)
    with pytest.raises(DomainError):
        handoff_data(chi, [1.0], 0.02, -0.1, np.zeros((1, 1)))


def test_envelope_vanishes_outside_support():
    lo, hi = PlateauProfile(0.0, 0.3, 0.03).support()
    z = np.array([lo - 1e-3, hi + 1e-3, hi + 1.0])
    assert np.abs(PlateauProfile(0.0, 0.3, 0.03).derivative(z)).max() < 1e-12


def test_two_term_field_packets_add():
    x = _pts()
    both = two_term_field(CHI2, W2, 0.02, 0.3, x)
    assert np.allclose(both, two_term_field(CHI2, W2, 0.02, 0.3, x, "plus") + two_term_field(CHI2, W2, 0.02, 0.3, x, "minus"))
    assert np.allclose(two_term_field(CHI2, W2, 0.02, 0.0, x), 2 * 0.02 * CHI2(x) * np.cos(x @ W2 / 0.02))
