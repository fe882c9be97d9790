import math

import numpy as np
import pytest

from westervelt.config import preset_fdtd_config
from westervelt.errors import AlignmentError, DomainError, HyperbolicityError, StepConvergenceError
from westervelt.fdtd import (
    FDTDConfig,
    Grid,
    StepSettings,
    WaveField,
    advance,
    initialize,
    leapfrog_energy,
    max_stable_dt,
    multi_indices,
    precheck,
    remainder_report,
    run_experiment,
    sample_alpha,
    scaled_norms,
    step,
)
from westervelt.linear_go import BeamEnvelope, GaussianProfile, PlateauProfile, two_term_field
from westervelt.nonlinearity import ConstantField, GaussianField, ZeroField, line_integral, Ray
from westervelt.tomography import packet_tilt, profile_zeros


@pytest.fixture(scope="module")
def preset_1d():
    return run_experiment(preset_fdtd_config("westervelt-1d"))


def test_grid_from_bounds():
    g = Grid.from_bounds((-1.0, 0.0), (1.0, 0.5), (0.1, 0.05))
    assert g.shape == (21, 11)
    assert g.points().shape == (21, 11, 2)
    assert g.points()[-1, -1] == pytest.approx([1.0, 0.5])
    g1 = Grid.from_bounds((0.0,), (1.0,), (0.25,))
    assert g1.storage_shape == (5, 1)


def test_grid_validation():
    with pytest.raises(DomainError):
        Grid((0.0,), (-0.1,), (4,))


@pytest.mark.parametrize("spacing", [(0.01,), (0.02, 0.02), (0.01, 0.03)])
def test_cfl_bound(spacing):
    g = Grid((0.0,) * len(spacing), spacing, (10,) * len(spacing))
    dt = max_stable_dt(g, 0.4, 0.5)
    if len(set(spacing)) == 1:
        assert dt == pytest.approx(0.4 * spacing[0] * math.sqrt(0.5) / math.sqrt(len(spacing)))
    assert dt <= 0.4 * min(spacing) * math.sqrt(0.5)
    with pytest.raises(DomainError):
        max_stable_dt(g, 0.6)


def test_boundary_codes():
    assert list(StepSettings(boundary="mur").codes(1)) == [1, 1, 2, 2]
    assert list(StepSettings(boundary=("periodic", "mur")).codes(2)) == [2, 2, 1, 1]
    with pytest.raises(DomainError):
        StepSettings(boundary=("periodic", "mur", "mur", "mur")).codes(2)
    with pytest.raises(DomainError):
        StepSettings(boundary="absorbing").codes(1)


def _periodic_wave(n=256, k=4, cfl=0.4):
    L = 2 * math.pi
    g = Grid((0.0,), (L / n,), (n,))
    x = g.axes()[0]
    dt = max_stable_dt(g, cfl, 1.0)
    s = StepSettings(cfl, 1.0, boundary="periodic")
    f = initialize(g, 1e-3 * np.cos(k * x), 1e-3 * k * np.sin(k * x), ZeroField(), dt, 0.0, s)
    return g, x, f, s


def test_linear_energy_conserved():
    g, x, f, s = _periodic_wave()
    e0 = leapfrog_energy(f)
    advance(f, ZeroField(), 1000, s)
    assert abs(leapfrog_energy(f) - e0) / e0 < 1e-6


def test_linear_plane_wave_follows_discrete_dispersion():
    g, x, f, s = _periodic_wave(n=256, k=4)
    advance(f, ZeroField(), 400, s)
    dx, dt, k = g.spacing[0], f.dt, 4
    w_d = 2 / dt * math.asin(dt / dx * math.sin(k * dx / 2))
    exact = 1e-3 * np.cos(k * x - w_d * f.t)
    assert np.abs(f.values() - exact).max() < 2e-3 * 1e-3


def test_taylor_start_formula():
    g = Grid((-1.0,), (0.01,), (201,))
    x = g.axes()[0]
    p0 = 0.05 * np.exp(-(x / 0.2) ** 2)
    alpha = ConstantField(1.0)
    dt = 0.002
    f = initialize(g, p0, np.zeros_like(p0), alpha, dt, 0.0, StepSettings(boundary="dirichlet"))
    lap = np.zeros_like(p0)
    lap[1:-1] = (p0[2:] - 2 * p0[1:-1] + p0[:-2]) / 0.01**2
    expected = p0 + 0.5 * dt**2 * lap / (1 - 2 * p0)
    assert np.allclose(f.values()[1:-1], expected[1:-1], atol=1e-15)


def test_functional_step_leaves_input():
    g, x, f, s = _periodic_wave(n=64)
    before = f.copy()
    nxt = step(f, ZeroField(), s)
    assert np.array_equal(f.p, before.p) and nxt.steps == f.steps + 1
    assert isinstance(nxt, WaveField)


def test_hyperbolicity_guard_names_time_and_node():
    g = Grid((-1.0,), (0.01,), (201,))
    x = g.axes()[0]
    p0 = 0.3 * np.exp(-(x / 0.1) ** 2)
    with pytest.raises(HyperbolicityError) as info:
        initialize(g, p0, np.zeros_like(p0), ConstantField(1.0), 0.002, 0.0, StepSettings(b0=0.5))
    (i,) = info.value.node
    assert 1 - 2 * p0[i] < 0.5
    assert info.value.time == 0.0


def test_fixed_point_failure_is_reported():
    g = Grid((-1.0,), (0.01,), (201,))
    x = g.axes()[0]
    p0 = 0.2 * np.cos(20 * x)
    f = initialize(g, p0, 5.0 * np.sin(20 * x), ConstantField(1.0), 0.004, 0.0, StepSettings(b0=0.1))
    with pytest.raises(StepConvergenceError):
        advance(f, ConstantField(1.0), 3, StepSettings(b0=0.1, max_iter=1))


def test_sample_alpha_floor():
    g = Grid((-4.0,), (0.01,), (801,))
    a = sample_alpha(GaussianField(1.0, 0.3), g)
    assert a.max() == pytest.approx(1.0)
    assert np.all(a[np.abs(g.axes()[0]) > 2.5] == 0.0)


def test_precheck_reports_shock_condition():
    cfg = preset_fdtd_config("westervelt-1d")
    pre = precheck(cfg)
    assert pre["no_shock"] and pre["no_shock_lhs"] == pytest.approx(0.7519884823893, abs=1e-9)


def test_preset_crest_leads(preset_1d):
    tilt = packet_tilt(preset_1d)
    crest = lambda p: p.theta[np.argmax(p.values)]  # noqa: E731
    lead = (crest(tilt.profile) - crest(tilt.linear_profile) + math.pi) % (2 * math.pi) - math.pi
    assert lead > 0


def test_preset_tilt_tracks_integral(preset_1d):
    tilt = packet_tilt(preset_1d)
    assert all(m.integral > 0 for m in tilt.measurements)
    assert tilt.relative_error < 0.05


def test_preset_zeros_stay_fixed(preset_1d):
    tilt = packet_tilt(preset_1d)
    z, zl = np.sort(profile_zeros(tilt.profile)), np.sort(profile_zeros(tilt.linear_profile))
    crest_shift = max(abs(m.shift) for m in tilt.measurements)
    assert np.abs(z - zl).max() < 0.1 * crest_shift


def test_backward_packet_stays_nearly_linear(preset_1d):
    cfg = preset_1d.config
    (t, p), (_, pl) = preset_1d.snapshots[0], preset_1d.linear_snapshots[0]
    x = preset_1d.grid.axes()[0]
    back = x < -1.0
    # first-order shift bound h chi^2 s_back with s_back the alpha mass met leftwards
    ys = np.linspace(-1.1, -0.3, 161)
    chi = cfg.envelope(ys[:, None])
    s_back = np.array([line_integral(cfg.alpha, Ray([y], [-1.0]), 0.0, t) for y in ys])
    bound = cfg.h * np.max(chi**2 * s_back)
    diff = np.abs(p - pl)[back].max()
    assert diff < 1.5 * bound
    assert diff < 0.05 * np.abs(pl[back]).max()


def test_amplitude_split(preset_1d):
    (t, pl) = preset_1d.linear_snapshots[0]
    x = preset_1d.grid.axes()[0]
    h = preset_1d.config.h
    for region in (x < -0.9, x > -0.4):
        assert np.abs(pl[region]).max() == pytest.approx(h * 1.0, rel=0.05)


def test_linear_preset_matches_two_term_go():
    cfg = preset_fdtd_config("linear-1d")
    res = run_experiment(cfg)
    x = res.grid.axes()[0]
    go = two_term_field(cfg.envelope, np.array([1.0]), cfg.h, res.terminal.t, x[:, None])
    fwd = x > 0.2
    assert np.abs(res.terminal.values() - go)[fwd].max() < 10 * cfg.h**2


def test_2d_difference_concentrated_in_beam_center():
    cfg = preset_fdtd_config("westervelt-2d")
    res = run_experiment(cfg)
    d = np.abs(res.difference)
    i, j = np.unravel_index(np.argmax(d), d.shape)
    xs, _ = res.grid.axes()
    assert abs(xs[i]) < 0.35


def test_scaled_norms_and_self_report():
    g = Grid((0.0,), (0.01,), (101,))
    x = g.axes()[0]
    u = np.sin(10 * x)
    rep = scaled_norms(u, g, 0.1, m=2)
    assert rep.sup_norm(0) == pytest.approx(1.0, abs=1e-3)
    assert rep.sup[(1,)] == pytest.approx(1.0, rel=1e-2)
    assert rep.sup_norm(0) <= rep.sup_norm(1) <= rep.sup_norm(2)
    f = WaveField(g, u[:, None], u[:, None], 1.0, 0.01)
    reps, _ = remainder_report([f], [u], [0.1])
    assert reps[0].sup_norm() == 0.0 and reps[0].l2_norm() == 0.0
    with pytest.raises(AlignmentError):
        remainder_report([f], [u[:-1]], [0.1])
    with pytest.raises(DomainError):
        scaled_norms(u, g, 0.1, m=5)


def test_multi_indices():
    assert len(multi_indices(2, 2)) == 6
    assert len(multi_indices(1, 3)) == 4


def test_forward_start_launches_one_packet():
    chi = BeamEnvelope(PlateauProfile(-0.6, 0.2, 0.04))
    cfg = FDTDConfig(
        alpha=ZeroField(), envelope=chi, direction=(1.0,), h=0.02, T=0.6, lower=(-1.2,), upper=(0.6,),
        spacing=(2 * math.pi * 0.02 / 40,), start="forward", t0=0.05, linear_reference=False,
    )
    res = run_experiment(cfg, check=False)
    x = res.grid.axes()[0]
    assert np.abs(res.terminal.values()[x < -0.6]).max() < 1e-3 * 0.02
    assert np.abs(res.terminal.values()).max() == pytest.approx(0.02, rel=0.05)
