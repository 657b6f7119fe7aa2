import numpy as np
import pytest

from rvmlab.errors import AxisCrossingError, ConfigurationError, DepositError
from rvmlab.fields import RadialGrid
from rvmlab.initdata import MarkerEnsemble, sample_markers
from rvmlab.particles import (deposit, free_streaming_radius, push,
                              suggest_substeps, support_extent)


def _single(r, rdot, L, w=1.0):
    return MarkerEnsemble(r=np.array([r]), rdot=np.array([rdot]),
                          L=np.array([L]), weight=np.array([w]))


def _zero_fields(g):
    z = np.zeros(g.n)
    return z, z.copy(), z.copy()


def test_radial_free_fall_is_exact():
    # L = 0, no fields: rddot = 0, RK4 reproduces the line exactly
    g = RadialGrid(0.01, 4.0)
    ens = _single(1.0, 0.5, 0.0)
    er, ep, b = _zero_fields(g)
    for _ in range(10):
        push(ens, er, ep, b, g.dr, 0.1, 4)
    assert ens.r[0] == pytest.approx(1.0 + 0.5 * 1.0, abs=1e-14)
    assert ens.rdot[0] == pytest.approx(0.5, abs=1e-15)


def test_free_streaming_matches_cartesian_line():
    g = RadialGrid(1e-3, 4.0)
    ens = _single(0.8, -2.0, 0.8 ** 2 * 3.0)
    r0, v0, L0 = 0.8, -2.0, 0.8 ** 2 * 3.0
    er, ep, b = _zero_fields(g)
    t = 0.0
    for _ in range(40):
        push(ens, er, ep, b, g.dr, 0.01, 64)
        t += 0.01
    exact = free_streaming_radius(r0, v0, L0, t)
    assert abs(ens.r[0] - exact) < 1e-12


def test_angular_momentum_conserved_without_transverse_fields():
    g = RadialGrid(1e-3, 4.0)
    ens = _single(0.8, -2.0, 1.3)
    er = np.where(g.r > 0, 0.3 / np.maximum(g.r, g.dr), 0.0)  # radial only
    z = np.zeros(g.n)
    for _ in range(25):
        push(ens, er, z, z, g.dr, 0.01, 32)
    assert ens.L[0] == 1.3  # source term is identically zero, bitwise equal


def test_push_convergence_order():
    # free streaming at a curvature-dominated perigee: global error O(h^4)
    r0, v0, L0 = 0.8, -26.0, 0.8 ** 2 * 6.0
    g = RadialGrid(1e-3, 4.0)
    er, ep, b = _zero_fields(g)
    horizon = 0.028
    errs, hs = [], []
    for nsub in (16, 32, 64, 128):
        ens = _single(r0, v0, L0)
        push(ens, er, ep, b, g.dr, horizon, nsub)
        errs.append(abs(ens.r[0] - free_streaming_radius(r0, v0, L0, horizon)))
        hs.append(horizon / nsub)
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
    assert min(orders) >= 3.7


def test_axis_crossing_is_fatal_for_head_on_marker():
    g = RadialGrid(0.01, 2.0)
    ens = _single(0.5, -1.0, 0.0)
    er, ep, b = _zero_fields(g)
    with pytest.raises(AxisCrossingError):
        push(ens, er, ep, b, g.dr, 1.0, 1)


def test_substep_refinement_rescues_close_swing():
    # angular momentum swings the marker around a tight perigee; a single
    # coarse substep overshoots through the axis but refinement resolves it
    g = RadialGrid(0.01, 4.0)
    ens = _single(0.3, -3.0, 0.03)
    er, ep, b = _zero_fields(g)
    used = push(ens, er, ep, b, g.dr, 0.21, 1)
    # the doubling engages (crossing detected at coarse resolution) and the
    # marker survives; accuracy at the first non-crossing resolution is not
    # guaranteed - that is the substep rule's job, exercised below
    assert used > 1
    assert ens.r[0] > 0.0
    exact = free_streaming_radius(0.3, -3.0, 0.03, 0.21)
    fine = _single(0.3, -3.0, 0.03)
    push(fine, er, ep, b, g.dr, 0.21, 4096)
    assert fine.r[0] == pytest.approx(exact, rel=1e-9)


def test_push_rejects_marker_leaving_grid():
    g = RadialGrid(0.01, 1.0)
    ens = _single(0.9, 5.0, 0.0)
    er, ep, b = _zero_fields(g)
    with pytest.raises(ConfigurationError):
        push(ens, er, ep, b, g.dr, 0.1, 8)


def test_deposit_single_marker_on_node():
    g = RadialGrid(0.01, 1.0)
    j = 30
    w = 0.002
    ens = _single(g.r[j], -1.5, 0.05, w)
    deposit(ens, g)
    assert g.rho[j] == pytest.approx(w / (2.0 * np.pi * g.r[j] * g.dr))
    assert g.rho[j - 1] == 0.0 and g.rho[j + 1] == 0.0
    assert g.j_r[j] == pytest.approx(-1.5 * g.rho[j])
    assert g.j_phi[j] == pytest.approx((0.05 / g.r[j]) * g.rho[j])


def test_deposit_is_linear_in_weight():
    g = RadialGrid(0.01, 1.0)
    j = 40
    one = _single(g.r[j], -1.0, 0.0, 0.003)
    two = MarkerEnsemble(r=np.array([g.r[j], g.r[j]]),
                         rdot=np.array([-1.0, -1.0]),
                         L=np.array([0.0, 0.0]),
                         weight=np.array([0.003, 0.003]))
    deposit(one, g)
    rho_one = g.rho[j]
    deposit(two, g)
    assert g.rho[j] == pytest.approx(2.0 * rho_one, rel=1e-15)


def test_deposit_conserves_total_charge(desk_params, profile, chi):
    g = RadialGrid(1e-3, 2.0)
    ens = sample_markers(desk_params, 30_000, profile=profile, chi=chi)
    total = deposit(ens, g)
    weights_sum = float(np.sum(ens.weight))
    assert abs(total - weights_sum) / weights_sum < 1e-12
    check = float(np.sum(g.rho * g.shell_area))
    assert abs(check - weights_sum) / weights_sum < 1e-12


def test_deposited_density_amplitude_window(desk_params, profile, chi):
    # deposited t=0 peak within [1/4, 4] of eps**alpha / 2
    g = RadialGrid(1e-3, 2.0)
    ens = sample_markers(desk_params, 50_000, profile=profile, chi=chi)
    deposit(ens, g)
    half_scale = 0.5 * desk_params.epsilon ** desk_params.alpha
    assert 0.25 * half_scale <= np.max(g.rho) <= 4.0 * half_scale


def test_deposit_rejects_marker_outside_grid():
    g = RadialGrid(0.01, 1.0)
    ens = _single(1.5, -1.0, 0.0)
    with pytest.raises(DepositError):
        deposit(ens, g)


def test_support_extent():
    ens = _single(0.7, -1.0, 0.0)
    assert support_extent(ens) == (0.7, 0.7)
    pair = MarkerEnsemble(r=np.array([0.6, 0.9]), rdot=np.array([-1.0, -1.0]),
                          L=np.array([0.0, 0.0]), weight=np.array([1.0, 1.0]))
    assert support_extent(pair) == (0.6, 0.9)


def test_suggest_substeps_tracks_fastest_marker():
    ens = _single(0.8, -30.0, 0.8 ** 2 * 6.0)
    n = suggest_substeps(ens, dt=1e-3, dr=1e-3, factor=4.0)
    speed = np.hypot(-30.0, 0.8 * 6.0)
    assert n == int(np.ceil(4.0 * speed))


def test_weights_never_written(desk_params, profile, chi):
    g = RadialGrid(1e-3, 2.0)
    ens = sample_markers(desk_params, 5000, profile=profile, chi=chi)
    before = ens.weight.copy()
    er, ep, b = _zero_fields(g)
    for _ in range(5):
        push(ens, er, ep, b, g.dr, 1e-3, 50)
        deposit(ens, g)
    assert np.array_equal(ens.weight, before)
