import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from todapolymer.core_paths import RngStream, TimeGrid, VectorPath, sample_brownian_path
from todapolymer.grsk import TriangularArray, transform_t_offset, tri_index
from todapolymer.toda_sde import (
    EntranceSpec,
    ExplosionError,
    KDrift,
    SdeConfig,
    drift_coefficients,
    entrance_point,
    entrance_starts,
    k_log_derivative,
    matsumoto_yor_log_z,
    pattern_gaps,
    simulate_k_diffusion,
    simulate_symmetric_s,
    simulate_triangular_z,
    simulate_whittaker_diffusion_n2,
    simulate_xy_pair_n2,
    symmetric_pair_from_bms,
    whittaker_drift_n2,
    xy_initial_law_normaliser,
)
from todapolymer.whittaker import log_whittaker_psi, whittaker_psi


def zero_path(n, dt=1e-3, horizon=1.0):
    g = TimeGrid.from_dt(dt, horizon)
    return VectorPath(g, np.zeros((g.steps + 1, n)))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10**6))
def test_drift_rows_sum_to_nu(n, seed):
    rng = np.random.default_rng(seed)
    state = TriangularArray(n, rng.normal(size=n * (n + 1) // 2))
    nu = rng.normal(size=n)
    b = drift_coefficients(state, nu)
    for k in range(1, n + 1):
        assert abs(b.row(k).sum() - nu[k - 1]) < 1e-9 * (1 + np.abs(b.row(k)).sum())


def test_drift_first_entry_uses_upper_neighbour():
    z = TriangularArray.from_rows([[0.2], [0.5, -0.7]])
    b = drift_coefficients(z, [0.0, 0.0])
    assert abs(b.get(2, 1) - math.exp(-0.7 - 0.2)) < 1e-15


def test_zero_noise_ode():
    # with no noise Z_{1,1} stays put and u = Z_{2,2} - Z_{1,1} solves u' = -e^u
    init = TriangularArray.from_rows([[0.0], [1.0, -1.0]])
    cfg = SdeConfig(1e-4, 1.0)
    out = simulate_triangular_z([0.0, 0.0], init, cfg, 0, noise=zero_path(2, 1e-4))
    u = out.values[-1, tri_index(2, 2)] - out.values[-1, 0]
    exact = -math.log(math.exp(1.0) + 1.0)
    assert abs(u - exact) < 1e-4
    assert abs(out.values[-1, 1:].sum() - 0.0) < 1e-12


def test_bottom_row_sum_is_noise_sum():
    noise = sample_brownian_path(3, [0.2, 0.0, -0.1], TimeGrid.from_dt(1e-3, 1.0), RngStream(4))
    init = TriangularArray(3, np.array([0.0, 0.3, -0.3, 0.5, 0.0, -0.5]))
    out = simulate_triangular_z([0.2, 0.0, -0.1], init, SdeConfig(1e-3, 1.0), 0, noise=noise)
    bottom = out.values[:, 3:].sum(1)
    assert np.allclose(bottom, noise.values.sum(1), atol=1e-12)


def test_pathwise_matches_offset_transform():
    n = 3
    init = TriangularArray(n, np.array([0.0, 0.4, -0.4, 0.9, 0.0, -0.9]))
    errs = []
    for dt in (1e-2, 1e-3):
        noise = sample_brownian_path(n, None, TimeGrid.from_dt(1e-4, 1.0), RngStream(8)).coarsen(int(round(dt / 1e-4)))
        z = simulate_triangular_z(np.zeros(n), init, SdeConfig(dt, 1.0), 0, noise=noise)
        ref = transform_t_offset(noise, init)
        errs.append(np.max(np.abs(z.values[1:] - ref.values[1:])))
    assert errs[1] < errs[0] / 5
    assert errs[1] < 5e-3


def test_nu_shift_moves_bottom_sum_mean():
    nu = np.array([0.5, -0.2])
    init = TriangularArray.from_rows([[0.0], [0.5, -0.5]])
    v = simulate_triangular_z(nu, init, SdeConfig(1e-2, 1.0), RngStream(3), reps=4000)
    s = v[:, 1:].sum(1)
    assert abs(s.mean() - nu.sum()) < 4 * math.sqrt(2 / 4000)


def test_replicas_reproducible():
    init = TriangularArray.from_rows([[0.0], [0.5, -0.5]])
    cfg = SdeConfig(1e-2, 0.5)
    a = simulate_triangular_z([0.1, 0.0], init, cfg, RngStream(5), reps=10)
    b = simulate_triangular_z([0.1, 0.0], init, cfg, RngStream(5), reps=10)
    assert np.array_equal(a, b)


def test_explosion_guard():
    init = TriangularArray.from_rows([[0.0], [0.0, 5.0]])
    with pytest.raises(ExplosionError) as info:
        simulate_triangular_z([0.0, 0.0], init, SdeConfig(1e-2, 1.0, guard=2.0), 0)
    assert info.value.exponent > 2.0


def test_init_validation():
    with pytest.raises(ValueError):
        simulate_triangular_z([0.0, 0.0], np.zeros((2, 2)), SdeConfig(1e-2, 1.0), 0, reps=2)


@pytest.mark.parametrize("m", [8.0, 12.0])
def test_entrance_gaps_far_below(m):
    v = entrance_starts(m, np.zeros(3), RngStream(2), 400)
    gaps = pattern_gaps(v, 3)
    assert np.all(np.median(gaps, axis=0) < -m / 4)
    assert np.allclose(v[:, 3:], entrance_point(m, 3))


def test_entrance_trajectory():
    out = simulate_triangular_z([0.0, 0.0], EntranceSpec(10.0), SdeConfig(1e-3, 0.2), RngStream(1))
    assert np.all(np.isfinite(out.values))
    assert np.allclose(out.values[0, 1:], [-5.0, 5.0])


def test_symmetric_s_top_entry_is_brownian():
    init = TriangularArray.from_rows([[0.0], [0.5, -0.5]])
    v = simulate_symmetric_s([0.3, -0.2], init, SdeConfig(1e-2, 1.0), RngStream(6), reps=4000)
    assert abs(v[:, 0].mean() - 0.3) < 4 / math.sqrt(4000)
    assert abs(v[:, 0].var() - 1.0) < 0.1


# ---------------------------------------------------------------------------
# K-diffusions and the N=2 Whittaker diffusion
# ---------------------------------------------------------------------------


def test_k_drift_half_order_closed_form():
    y = np.linspace(-8, 20, 57)
    assert np.allclose(KDrift(0.5)(y), 0.5 + np.exp(-y), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("mu", [0.0, 0.3, 1.7])
def test_k_drift_table_against_scipy(mu):
    y = np.array([-5.0, -1.0, 0.3, 4.0, 9.0])
    z = np.exp(-y)
    ref = z * (special.kv(mu - 1, z) + special.kv(mu + 1, z)) / (2 * special.kv(mu, z))
    assert np.allclose(KDrift(mu)(y), ref, rtol=1e-8)
    assert np.allclose(k_log_derivative(mu, y), ref, rtol=1e-11)


def test_k_drift_limits():
    assert abs(KDrift(0.8).remainder(np.array([100.0]))[0] - 0.8) < 1e-12
    assert abs(KDrift(0.0).remainder(np.array([80.0]))[0] - 1 / (80 + math.log(2) - np.euler_gamma)) < 1e-15


def test_k_diffusion_from_minus_infinity():
    p = simulate_k_diffusion(0.0, -np.inf, SdeConfig(1e-3, 1.0), RngStream(2))
    assert p.start == 1
    assert np.all(np.isfinite(p.values))


def test_whittaker_drift_is_log_gradient():
    nu = np.array([0.4, -0.1])
    x = np.array([0.3, -0.5])
    h = 1e-6
    grad = []
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        a = log_whittaker_psi(x + e, nu).log_value.real
        b = log_whittaker_psi(x - e, nu).log_value.real
        grad.append((a - b) / (2 * h))
    assert np.allclose(whittaker_drift_n2(nu, x), grad, atol=1e-7)


def test_whittaker_diffusion_sum_is_brownian():
    nu = np.array([0.3, 0.2])
    x = simulate_whittaker_diffusion_n2(nu, [0.1, -0.1], SdeConfig(1e-2, 1.0), RngStream(3), reps=4000)
    s = x.sum(1)
    assert abs(s.mean() - 0.5) < 4 * math.sqrt(2 / 4000)
    assert abs(s.var() - 2.0) < 0.2


def test_whittaker_diffusion_entrance_start():
    p = simulate_whittaker_diffusion_n2([0.0, 0.0], [-np.inf, np.inf], SdeConfig(1e-3, 0.5), RngStream(4))
    assert p.start == 1 and np.all(np.isfinite(p.values))


def test_xy_normaliser_is_psi():
    nu, x0 = np.array([0.4, -0.1]), np.array([0.3, -0.2])
    assert abs(xy_initial_law_normaliser(nu, x0) - whittaker_psi(x0, nu).real) < 1e-8


def test_xy_pair_shapes():
    x, y = simulate_xy_pair_n2([0.1, 0.0], [0.3, -0.2], SdeConfig(1e-2, 0.5), RngStream(1), reps=5)
    assert x.shape == (5, 2) and y.shape == (5,)
    px, py = simulate_xy_pair_n2([0.1, 0.0], [0.3, -0.2], SdeConfig(1e-2, 0.5), RngStream(1))
    assert np.allclose(px.values[0], [0.3, -0.2])


def test_matsumoto_yor_first_moment():
    # E int_0^1 exp(2B_s - B_1) ds = e^{1/2} for standard B
    z = np.exp(matsumoto_yor_log_z(0.0, SdeConfig(1e-3, 1.0), RngStream(7), 20000))
    se = z.std() / math.sqrt(z.size)
    assert abs(z.mean() - math.exp(0.5)) < 4 * se


def test_symmetric_pair_sum_variance():
    x, y = symmetric_pair_from_bms(SdeConfig(1e-2, 1.0), RngStream(3), 4000)
    s = (x + y) / math.sqrt(2)
    assert abs(s.var() - 1.0) < 0.1


def test_symmetric_pair_times_validated():
    with pytest.raises(ValueError):
        symmetric_pair_from_bms(SdeConfig(1e-2, 1.0), RngStream(3), 10, times=(0.0,))
