import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from todapolymer.core_paths import TimeGrid, VectorPath
from todapolymer.grsk import (
    TriangularArray,
    canonical_word,
    gamma_k,
    greene_k_sum,
    is_interlacing,
    pitman_transform,
    sum_residual,
    transform_t,
    transform_t_beta,
    transform_ti,
    transform_word,
    tri_index,
    tri_labels,
    undefined_prefix,
    verify_braid,
    verify_symmetry,
)

from conftest import brownian


def test_tri_indexing():
    assert tri_index(1, 1) == 0
    assert tri_index(3, 3) == 5
    assert tri_labels(2) == ["T_1_1", "T_2_1", "T_2_2"]
    T = TriangularArray.from_rows([[1.0], [2.0, 3.0]])
    assert T.get(2, 2) == 3.0
    assert np.array_equal(T.bottom, [2.0, 3.0])
    with pytest.raises(ValueError):
        TriangularArray.from_rows([[1.0], [2.0]])


def test_elementary_transform_against_direct_sum():
    p = brownian(2, dt=0.05, seed=3)
    out = transform_ti(p, 1).values
    v = p.values
    dt = p.grid.dt
    for m in (5, 12, 20):
        s = sum(dt * math.exp(v[j - 1, 1] - v[j, 0]) for j in range(1, m + 1))
        assert abs(out[m, 0] - (v[m, 0] + math.log(s))) < 1e-9
        assert abs(out[m, 1] - (v[m, 1] - math.log(s))) < 1e-9


@pytest.mark.parametrize("n", [2, 3, 4])
def test_sum_conservation(n):
    assert sum_residual(brownian(n, dt=1e-3, seed=n)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(0, 10**6), st.floats(-5, 5))
def test_common_shift_equivariance(n, seed, c):
    p = brownian(n, dt=0.02, seed=seed)
    q = VectorPath(p.grid, p.values + c)
    a = transform_t(p).values
    b = transform_t(q).values
    s = undefined_prefix(n)
    assert np.allclose(a[s:] + c, b[s:], atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10**6))
def test_sum_conservation_property(n, seed):
    assert sum_residual(brownian(n, dt=0.02, seed=seed)) < 1e-10


def test_braid_exact_on_grid(bm3):
    out = verify_braid(bm3, 1, factors=(10, 1))
    assert out["exact_on_grid"]
    assert max(out["residual"]) < 1e-12


def test_reduced_words_agree():
    p = brownian(3, dt=1e-3, seed=4)
    a = transform_word(p, [1, 2, 1]).values
    b = transform_word(p, [2, 1, 2]).values
    s = undefined_prefix(3)
    assert np.max(np.abs(a[s:] - b[s:])) < 1e-10
    assert canonical_word(3) == [1, 2, 1] or len(canonical_word(3)) == 3


def test_symmetry_exact_at_n2_with_trapezoid():
    p = brownian(2, dt=1e-3, seed=5)
    assert verify_symmetry(p, scheme="trapezoid")["residual"] < 1e-12


def test_symmetry_is_first_order_at_n3():
    # the reflection maps the staggered rule to its mirror, so the residual is O(dt)
    p = brownian(3, dt=1e-4, seed=6)
    r_fine = verify_symmetry(p)["residual"]
    r_coarse = verify_symmetry(p.coarsen(10))["residual"]
    assert r_fine < r_coarse
    assert r_coarse / r_fine > 3


@pytest.mark.parametrize("n,k", [(2, 1), (2, 2), (3, 1), (3, 2), (3, 3)])
def test_greene_sums(n, k):
    env = brownian(n, dt=1e-2, seed=10 + k)
    W = VectorPath(env.grid, env.values[:, ::-1])
    tw = transform_t(W).values
    got = greene_k_sum(env, k)
    assert abs(got - tw[-1, :k].sum()) < 1e-10


def test_greene_unsupported():
    with pytest.raises(NotImplementedError):
        greene_k_sum(brownian(4), 2)


def test_pitman_n2_closed_form():
    p = brownian(2, dt=1e-3, seed=8)
    out = pitman_transform(p).values
    v = p.values
    x = v[:, 0] - v[:, 1]
    sup = np.maximum.accumulate(np.maximum(-x, 0.0))
    assert np.allclose(out[:, 0] - out[:, 1], x + 2 * sup, atol=1e-12)
    assert np.allclose(out.sum(1), v.sum(1), atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_pitman_pattern_interlaces(n):
    p = brownian(n, dt=1e-3, seed=20 + n)
    _, pat = pitman_transform(p, return_pattern=True)
    assert np.all(is_interlacing(pat.values, n, tol=1e-12))


def test_gamma_k_bottom_is_ordered():
    p = brownian(3, dt=1e-3, seed=9)
    pat = gamma_k(p, 3)
    b = pat.values[:, -3:]
    assert np.all(np.diff(b, axis=1) <= 1e-12)


def test_beta_transform_tends_to_pitman():
    # smooth path, so grid effects are O(dt) and the beta error dominates
    g = TimeGrid.from_dt(1e-4, 1.0)
    t = g.times
    p = VectorPath(g, np.column_stack([np.sin(3 * t), 2 * t * t]))
    pit = pitman_transform(p).values
    errs = []
    for beta in (5.0, 50.0, 500.0):
        tb = transform_t_beta(p, beta).values
        errs.append(np.max(np.abs(tb[2000:] - pit[2000:])))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.02


def test_beta_one_is_plain_transform():
    p = brownian(3, dt=1e-2, seed=13)
    s = undefined_prefix(3)
    assert np.allclose(transform_t_beta(p, 1.0).values[s:], transform_t(p).values[s:], atol=1e-12)


def test_beta_must_be_positive():
    with pytest.raises(ValueError):
        transform_t_beta(brownian(2), 0.0)


def test_pattern_csv_header():
    _, pat = transform_t(brownian(2, dt=0.25), return_pattern=True)
    lines = pat.to_csv().splitlines()
    assert lines[0] == "t,T_1_1,T_2_1,T_2_2"
    assert lines[1].startswith("0,nan")


def test_undefined_prefix_reported_as_nan():
    p = brownian(3, dt=0.1)
    out = transform_t(p)
    assert np.all(np.isnan(out.defined_values()[: undefined_prefix(3)]))
    assert np.all(np.isfinite(out.defined_values()[undefined_prefix(3):]))


def test_grid_of_transform_matches_input():
    p = brownian(2, dt=0.1)
    assert transform_t(p).grid == TimeGrid.from_dt(0.1, 1.0)
