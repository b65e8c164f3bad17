import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize, special

from todapolymer.core_paths import TimeGrid, VectorPath
from todapolymer.grsk import transform_array, transform_t
from todapolymer.polymer import (
    free_energy_check,
    ground_state,
    ground_state_bruteforce,
    log_partition,
    log_partition_array,
    sample_log_partition_end,
    variational_free_energy,
)

from conftest import brownian

FREE_ENERGY_T_STAR = 1.426255120215079
FREE_ENERGY_VALUE = 1.4610543264294549


def direct_log_z(B, dt, beta=1.0):
    """Sum over strictly increasing jump panels, written out term by term."""
    m, n = B.shape[0] - 1, B.shape[1]
    terms = []
    for js in itertools.combinations(range(1, m + 1), n - 1):
        e, prev = 0.0, 0
        for k, j in enumerate(js):
            e += B[j - 1, k] - (B[prev, k] if k else 0.0)
            prev = j
        e += B[m, n - 1] - B[prev, n - 1]
        terms.append(beta * e + (n - 1) * math.log(dt))
    return float(special.logsumexp(terms))


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("beta", [1.0, 0.4])
def test_log_partition_against_enumeration(n, beta):
    p = brownian(n, dt=0.1, seed=n)
    got = log_partition(p, beta)[-1, -1]
    assert abs(got - direct_log_z(p.values, 0.1, beta)) < 1e-10


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_dp_identity_with_reversed_environment(n):
    p = brownian(n, dt=1e-3, seed=30 + n)
    lz = log_partition(p)[:, -1]
    W = VectorPath(p.grid, p.values[:, ::-1])
    tw = transform_t(W).values[:, 0]
    w = slice(100, None)
    assert np.max(np.abs(lz[w] - tw[w])) < 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10**6), st.sampled_from([0.5, 1.0, 2.0]))
def test_dp_identity_property(n, seed, beta):
    B = brownian(n, dt=0.02, seed=seed).values
    a = log_partition_array(B, 0.02, beta)[-1, -1]
    b = transform_array(beta * B[:, ::-1], 0.02)[-1, 0]
    assert abs(a - b) < 1e-9


def test_beta_zero_gives_simplex_volume():
    p = brownian(3, dt=1e-3, seed=1)
    lz = log_partition(p, 0.0)[-1, -1]
    # discrete count of strictly increasing panels: C(M, 2) dt^2
    assert abs(lz - math.log(math.comb(1000, 2) * 1e-6)) < 1e-10


def test_undefined_levels_are_nan():
    out = log_partition(brownian(3, dt=0.1))
    assert np.isnan(out[0, 1]) and np.isnan(out[1, 2])
    assert np.isfinite(out[2, 2])


def test_ground_state_against_bruteforce():
    for seed in range(5):
        p = brownian(3, dt=0.05, seed=seed)
        assert abs(ground_state(p)[-1] - ground_state_bruteforce(p)) < 1e-12


def test_ground_state_linear_environment():
    g = TimeGrid.from_dt(0.01, 1.0)
    t = g.times
    p = VectorPath(g, np.column_stack([t, np.zeros_like(t)]))
    # the last panel is reserved for the jump
    assert abs(ground_state(p)[-1] - (1.0 - 0.01)) < 1e-12


def test_zero_temperature_limit():
    p = brownian(3, dt=0.01, seed=2)
    m = ground_state(p)[-1]
    gaps = [abs(log_partition(p, b)[-1, -1] / b - m) for b in (10.0, 100.0, 1000.0)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.02


def test_variational_free_energy_frozen():
    out = variational_free_energy(1.0)
    assert abs(out["t_star"] - FREE_ENERGY_T_STAR) < 1e-12
    assert abs(out["value"] - FREE_ENERGY_VALUE) < 1e-12


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_variational_free_energy_scipy_oracle(beta):
    res = optimize.minimize_scalar(lambda t: beta**2 * t - special.digamma(t),
                                   bounds=(1e-6, 100.0), method="bounded",
                                   options={"xatol": 1e-12})
    expect = res.fun - math.log(beta**2)
    assert abs(variational_free_energy(beta)["value"] - expect) < 1e-8


def test_free_energy_reproducible_across_threads():
    g = TimeGrid(10.0, 500)
    a = sample_log_partition_end(10, 1.0, g, 4, 6, threads=1)
    b = sample_log_partition_end(10, 1.0, g, 4, 6, threads=3)
    assert np.array_equal(a, b)


def test_free_energy_check_small():
    out = free_energy_check(20, 1.0, None, 3, reps=2)
    assert out["N"] == 20 and math.isfinite(out["estimate"])
    with pytest.raises(ValueError):
        free_energy_check(10, 1.0, TimeGrid(5.0, 500), 1)
