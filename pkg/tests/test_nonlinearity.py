import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import erf, erfinv

from westervelt.errors import DomainError
from westervelt.nonlinearity import (
    BoxField,
    ConstantField,
    DiskField,
    GaussianField,
    MovedField,
    Ray,
    RigidMotion,
    SampledField,
    SumField,
    ZeroField,
    accumulated_integral,
    line_integral,
    no_shock_condition,
    planar_rotation,
    rotation_to,
    shock_parameter,
)

angles = st.floats(0.0, 2 * math.pi, allow_nan=False)
offsets = st.floats(-0.8, 0.8, allow_nan=False)


def _ray2(angle, offset):
    n = np.array([math.cos(angle), math.sin(angle)])
    w = np.array([-math.sin(angle), math.cos(angle)])
    return Ray(offset * n, w)


def test_gaussian_full_line_integral(alpha_1d):
    # 0.3 * sqrt(2 pi)
    assert line_integral(alpha_1d, Ray([0.0], [1.0])) == pytest.approx(0.7519884823893, abs=1e-10)


@pytest.mark.parametrize("s0, s1", [(0.0, 0.4), (-0.7, 0.7), (-2.0, 0.1), (0.3, 5.0)])
def test_gaussian_partial_integral_matches_erf(alpha_1d, s0, s1):
    c = 0.3 * math.sqrt(2)
    oracle = 0.3 * math.sqrt(math.pi / 2) * (erf(s1 / c) - erf(s0 / c))
    assert line_integral(alpha_1d, Ray([0.0], [1.0]), s0, s1) == pytest.approx(oracle, abs=1e-10)


@given(angles, offsets)
def test_quadrature_matches_closed_form_2d(phantom, angle, offset):
    ray = _ray2(angle, offset)
    assert line_integral(phantom, ray) == pytest.approx(phantom.exact_line_integral(ray), abs=1e-10)


def test_anisotropic_gaussian_closed_form():
    g = GaussianField(1.3, (0.2, 0.45), (0.1, 0.0), dim=2)
    ray = _ray2(0.6, 0.2)
    assert line_integral(g, ray) == pytest.approx(g.exact_line_integral(ray), abs=1e-10)


def test_box_chord_length():
    box = BoxField(2.0, (-0.5, -0.25), (0.5, 0.25))
    assert line_integral(box, Ray([0.0, -3.0], [0.0, 1.0])) == pytest.approx(2.0 * 0.5, abs=1e-9)
    assert line_integral(box, Ray([0.0, 0.9], [1.0, 0.0])) == pytest.approx(0.0, abs=1e-12)


def test_disk_chord_length():
    disk = DiskField(1.0, 0.5, (0.0, 0.0), edge=1e-3)
    chord = 2 * math.sqrt(0.25 - 0.3**2)
    assert line_integral(disk, Ray([0.3, 0.0], [0.0, 1.0])) == pytest.approx(chord, rel=1e-3)


def test_sum_field_is_linear(phantom):
    other = GaussianField(0.3, 0.4, (-0.2, 0.3), dim=2)
    ray = _ray2(1.0, 0.1)
    total = line_integral(SumField((phantom, other)), ray)
    assert total == pytest.approx(line_integral(phantom, ray) + line_integral(other, ray), abs=1e-10)


def test_sampled_field_reproduces_smooth_data(phantom):
    axis = np.linspace(-1.5, 1.5, 121)
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    vals = phantom.evaluate(np.stack([X, Y], axis=-1))
    sampled = SampledField(vals, (-1.5, -1.5), (axis[1] - axis[0],) * 2)
    pts = np.random.default_rng(0).uniform(-1, 1, (50, 2))
    assert np.abs(sampled.evaluate(pts) - phantom.evaluate(pts)).max() < 1e-4


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_rotation_to_maps_last_axis(dim):
    rng = np.random.default_rng(dim)
    for _ in range(5):
        w = rng.normal(size=dim)
        w /= np.linalg.norm(w)
        R = rotation_to(w)
        assert np.allclose(R @ R.T, np.eye(dim), atol=1e-12)
        # in 1D a flip is the only map onto omega = -1
        assert np.linalg.det(R) == pytest.approx(1.0 if dim > 1 else float(np.sign(w[0])))
        assert np.allclose(R[:, -1], w, atol=1e-12)


def test_rotation_to_antipodal_3d():
    R = rotation_to([0.0, 0.0, -1.0])
    assert np.allclose(R[:, -1], [0, 0, -1])
    assert np.linalg.det(R) == pytest.approx(1.0)


@given(angles, offsets, st.floats(-0.5, 0.5), st.floats(0.0, 2 * math.pi))
def test_motion_preserves_line_integrals(phantom, angle, offset, shift, rot):
    motion = RigidMotion(np.array([shift]), planar_rotation(rot))
    moved = MovedField(phantom, motion)
    ray = _ray2(angle, offset)
    B = motion.rotation
    mapped = Ray((ray.base + motion.full_shift) @ B.T, ray.direction @ B.T)
    assert line_integral(moved, ray) == pytest.approx(line_integral(phantom, mapped), abs=1e-9)


def test_moved_field_closed_form(phantom):
    moved = MovedField(phantom, RigidMotion(np.array([0.2]), planar_rotation(0.4)))
    ray = _ray2(2.0, -0.3)
    assert line_integral(moved, ray) == pytest.approx(moved.exact_line_integral(ray), abs=1e-10)


def test_ray_requires_unit_direction():
    with pytest.raises(DomainError):
        Ray([0.0, 0.0], [1.0, 1.0])


def test_rigid_motion_rejects_reflection():
    with pytest.raises(DomainError):
        RigidMotion(np.zeros(1), np.diag([1.0, -1.0]))


def test_accumulated_integral_is_monotone(alpha_1d):
    s = np.linspace(0, 2, 21)
    acc = accumulated_integral(alpha_1d, Ray([-1.0], [1.0]), s)
    assert acc[0] == 0.0
    assert np.all(np.diff(acc) > 0)
    assert acc[-1] == pytest.approx(line_integral(alpha_1d, Ray([-1.0], [1.0]), 0, 2), abs=1e-10)


@pytest.mark.parametrize("M", [0.5, 1.0, 2.0, 4.0])
def test_shock_parameter_constant_alpha(M):
    assert shock_parameter(ConstantField(1.0), Ray([0.0], [1.0]), M) == pytest.approx(1.0 / M, abs=1e-10)


def test_shock_parameter_gaussian_inverts_erf(alpha_1d):
    # int_a^{a+s} alpha = 1/M solved in closed form
    a, M, sig = -0.7, 1.5, 0.3
    c = sig * math.sqrt(2)
    s = c * erfinv(erf(a / c) + (1 / M) / (sig * math.sqrt(math.pi / 2))) - a
    assert shock_parameter(alpha_1d, Ray([a], [1.0]), M) == pytest.approx(s, abs=1e-8)
    assert s == pytest.approx(1.078313578, abs=1e-8)


def test_no_shock_when_total_integral_small(alpha_1d):
    assert shock_parameter(alpha_1d, Ray([-0.7], [1.0]), 1.0) == math.inf
    assert shock_parameter(ZeroField(), Ray([0.0], [1.0]), 3.0) == math.inf


def test_shock_parameter_rejects_nonpositive_amplitude(alpha_1d):
    with pytest.raises(DomainError):
        shock_parameter(alpha_1d, Ray([0.0], [1.0]), 0.0)


@pytest.mark.parametrize("chi_max, ok", [(1.5, False), (1.0, True)])
def test_no_shock_condition_1d(alpha_1d, chi_max, ok):
    check = no_shock_condition(alpha_1d, chi_max)
    assert check.satisfied is ok
    assert check.lhs == pytest.approx(chi_max * 0.7519884823893, rel=1e-9)


def test_no_shock_condition_2d_takes_central_ray(phantom):
    check = no_shock_condition(phantom, 1.0, direction=[0.0, 1.0])
    peak = 0.8 * 0.25 * math.sqrt(2 * math.pi)
    assert check.max_integral == pytest.approx(peak, rel=1e-3)
