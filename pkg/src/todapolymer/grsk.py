"""Geometric RSK path transforms and their zero-temperature limits.

For a path ``eta`` in R^N the elementary transform is

    (T_i eta)(t) = eta(t) + log( int_0^t exp(eta_{i+1} - eta_i) ds ) (e_i - e_{i+1}),

``Pi_1 = id``, ``Pi_k = T_1 o ... o T_{k-1} o Pi_{k-1}`` and ``T = Pi_N``.

Discretization
--------------
The default ``"staggered"`` rule evaluates panel ``j`` of the integral as
``dt * exp(eta_{i+1}(t_{j-1}) - eta_i(t_j))``.  With it, the polymer dynamic
program of :mod:`todapolymer.polymer`, the braid relations and the Greene
sums hold exactly on the grid.  Near ``t = 0`` each running integral starts
from a tiny formal value ``exp(-K p)``, where ``p`` is its vanishing order;
these boundary values are kept internally and the first ``N - 1`` grid
points of a full transform are flagged undefined.  ``"trapezoid"`` uses
symmetric trapezoid panels instead; it commutes exactly with the reflection
``eta -> -sigma_0 eta`` at N = 2 but makes the polymer identity hold only
up to O(dt).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core_paths import TimeGrid, VectorPath, write_table_csv

BOUNDARY_K = 60.0
SCHEMES = ("staggered", "trapezoid")


# ---------------------------------------------------------------------------
# Triangular arrays and pattern trajectories
# ---------------------------------------------------------------------------


def tri_size(n: int) -> int:
    return n * (n + 1) // 2


def tri_index(k: int, i: int) -> int:
    """Flat position of entry (k, i), 1 <= i <= k (one-based)."""
    return k * (k - 1) // 2 + i - 1


def tri_labels(n: int) -> list:
    return [f"T_{k}_{i}" for k in range(1, n + 1) for i in range(1, k + 1)]


@dataclass(frozen=True)
class TriangularArray:
    """Real array ``T_{k,i}``, ``1 <= i <= k <= n``, stored row by row."""

    n: int
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float).reshape(-1)
        if e.size != tri_size(self.n):
            raise ValueError("entry count does not match n")
        if not np.all(np.isfinite(e)):
            raise ValueError("triangular array entries must be finite")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @classmethod
    def from_rows(cls, rows) -> "TriangularArray":
        rows = [np.atleast_1d(np.asarray(r, dtype=float)) for r in rows]
        for k, r in enumerate(rows, start=1):
            if r.size != k:
                raise ValueError("row k must have k entries")
        return cls(len(rows), np.concatenate(rows))

    def get(self, k: int, i: int) -> float:
        return float(self.entries[tri_index(k, i)])

    def row(self, k: int) -> np.ndarray:
        a = tri_index(k, 1)
        return np.array(self.entries[a: a + k])

    @property
    def bottom(self) -> np.ndarray:
        return self.row(self.n)

    def rows(self) -> list:
        return [self.row(k) for k in range(1, self.n + 1)]


@dataclass(frozen=True)
class PatternTrajectory:
    """Time-indexed triangular arrays; ``values[m]`` is the flat array at ``t_m``."""

    grid: TimeGrid
    n: int
    values: np.ndarray
    start: int = 1

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.steps + 1, tri_size(self.n)):
            raise ValueError("pattern values have the wrong shape")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def level(self, k: int) -> np.ndarray:
        a = tri_index(k, 1)
        out = np.array(self.values[:, a: a + k])
        out[: self.start] = np.nan
        return out

    def state(self, m: int) -> TriangularArray:
        if m < self.start:
            raise ValueError("pattern undefined at this grid index")
        return TriangularArray(self.n, self.values[m])

    def bottom(self) -> VectorPath:
        a = tri_index(self.n, 1)
        return VectorPath(self.grid, self.values[:, a:], self.start)

    def to_csv(self, fh=None) -> str:
        vals = np.array(self.values)
        vals[: self.start] = np.nan
        rows = np.column_stack([self.grid.times, vals])
        return write_table_csv(["t"] + tri_labels(self.n), rows, fh)


# ---------------------------------------------------------------------------
# Array engine (batch axes in front, time on axis -2, coordinate on axis -1)
# ---------------------------------------------------------------------------


def _check_scheme(scheme):
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def _running_log_integral(a, b, dt, scheme, start, regularized):
    """Running log of int exp(b - a) with initial (log) value ``start``."""
    if scheme == "staggered":
        panels = math.log(dt) + b[..., :-1] - a[..., 1:]
    else:
        f = b - a
        panels = math.log(dt / 2.0) + np.logaddexp(f[..., :-1], f[..., 1:])
        if regularized:
            panels[..., 0] = math.log(dt / 2.0) + f[..., 1]
    head = np.broadcast_to(start, panels.shape[:-1] + (1,)).astype(float)
    return np.logaddexp.accumulate(np.concatenate([head, panels], axis=-1), axis=-1)


def _ti_inplace(x, q, i, dt, scheme, offset=None):
    """Apply T_i (zero-based ``i``) to ``x`` in place, updating orders ``q``."""
    a = x[..., :, i]
    b = x[..., :, i + 1]
    if offset is None:
        p = q[i + 1] - q[i] + 1.0
        start = -BOUNDARY_K * p
        regularized = (q[i] != 0.0) or (q[i + 1] != 0.0)
    else:
        start = np.asarray(offset, dtype=float)[..., None]
        regularized = False
    L = _running_log_integral(a, b, dt, scheme, start, regularized)
    x[..., :, i] += L
    x[..., :, i + 1] -= L
    if offset is None:
        q[i], q[i + 1] = q[i + 1] + 1.0, q[i] - 1.0
    return L


def level_word(k: int) -> list:
    """Zero-based indices applied (in order) to pass from Pi_{k-1} to Pi_k."""
    return list(range(k - 2, -1, -1))


def canonical_word(n: int) -> list:
    w = []
    for k in range(2, n + 1):
        w += level_word(k)
    return w


def apply_word(x, word, dt, scheme="staggered", orders=None, beta=None):
    """Apply ``T_{w_1}`` first, then ``T_{w_2}``, ... to an array copy.

    Returns ``(array, orders)``.  With ``beta`` the beta-transforms are used.
    """
    _check_scheme(scheme)
    x = np.array(x, dtype=float)
    n = x.shape[-1]
    q = [0.0] * n if orders is None else list(orders)
    if beta is not None:
        x *= beta
        shift = math.log(beta * beta)
    for i in word:
        if not 0 <= i < n - 1:
            raise ValueError("transform index out of range")
        _ti_inplace(x, q, i, dt, scheme)
        if beta is not None:
            x[..., :, i] += shift
            x[..., :, i + 1] -= shift
    if beta is not None:
        x /= beta
    return x, tuple(q)


def transform_array(x, dt, scheme="staggered", beta=None, record=False):
    """Full transform ``T`` on an array ``(..., M+1, N)``.

    With ``record`` also returns the flat pattern ``(..., M+1, N(N+1)/2)``
    whose level ``k`` row is ``(Pi_k x)_{1..k}``.
    """
    _check_scheme(scheme)
    x = np.array(x, dtype=float)
    n = x.shape[-1]
    q = [0.0] * n
    pat = None
    if record:
        pat = np.empty(x.shape[:-1] + (tri_size(n),))
    if beta is not None:
        x *= beta
        shift = math.log(beta * beta)
    if record:
        pat[..., 0] = x[..., 0] / (beta or 1.0)
    for k in range(2, n + 1):
        for i in level_word(k):
            _ti_inplace(x, q, i, dt, scheme)
            if beta is not None:
                x[..., :, i] += shift
                x[..., :, i + 1] -= shift
        if record:
            a = tri_index(k, 1)
            pat[..., a: a + k] = x[..., :k] / (beta or 1.0)
    if beta is not None:
        x /= beta
    return (x, pat) if record else x


def word_orders(word, n: int, orders=None) -> tuple:
    """Boundary orders of each coordinate after applying ``word``."""
    q = [0.0] * n if orders is None else list(orders)
    for i in word:
        q[i], q[i + 1] = q[i + 1] + 1.0, q[i] - 1.0
    return tuple(q)


def undefined_prefix(n: int) -> int:
    """Grid indices below this are flagged undefined for the full transform."""
    return max(1, n - 1)


# ---------------------------------------------------------------------------
# Public path transforms
# ---------------------------------------------------------------------------


def _check_path(path):
    if not isinstance(path, VectorPath):
        raise TypeError("expected a VectorPath")


def transform_ti(path: VectorPath, i: int, scheme: str = "staggered") -> VectorPath:
    """Elementary transform ``T_i`` (one-based ``i``)."""
    _check_path(path)
    n = path.dims
    if not 1 <= i <= n - 1:
        raise ValueError(f"index i must satisfy 1 <= i <= {n - 1}")
    x, q = apply_word(path.values, [i - 1], path.grid.dt, scheme, path.orders)
    return VectorPath(path.grid, x, max(path.start, 1), q)


def transform_word(path: VectorPath, word, scheme: str = "staggered") -> VectorPath:
    """Apply ``T_{w_1}``, then ``T_{w_2}``, ... (one-based indices)."""
    _check_path(path)
    x, q = apply_word(path.values, [w - 1 for w in word], path.grid.dt, scheme, path.orders)
    start = max(path.start, undefined_prefix(path.dims)) if len(word) else path.start
    return VectorPath(path.grid, x, start, q)


def transform_pi_k(path: VectorPath, k: int, scheme: str = "staggered") -> PatternTrajectory:
    """Trajectory of ``((Pi_j eta)_i)_{i <= j <= k}``."""
    _check_path(path)
    if path.start:
        raise ValueError("path must be defined from t_0")
    n = path.dims
    if not 1 <= k <= n:
        raise ValueError(f"level k must satisfy 1 <= k <= {n}")
    _, pat = transform_array(path.values[:, :k], path.grid.dt, scheme, record=True)
    start = undefined_prefix(k) if k > 1 else 0
    return PatternTrajectory(path.grid, k, pat, start)


def transform_t(path: VectorPath, scheme: str = "staggered", return_pattern: bool = False):
    """Full transform ``T = Pi_N``; optionally also the pattern trajectory."""
    _check_path(path)
    if path.start:
        raise ValueError("path must be defined from t_0")
    n = path.dims
    x, pat = transform_array(path.values, path.grid.dt, scheme, record=True)
    start = undefined_prefix(n) if n > 1 else 0
    out = VectorPath(path.grid, x, start, word_orders(canonical_word(n), n))
    if return_pattern:
        return out, PatternTrajectory(path.grid, n, pat, start)
    return out


def transform_t_beta(path: VectorPath, beta: float, scheme: str = "staggered") -> VectorPath:
    """beta-transform: ``(1/beta) log(beta^2 int exp(beta(eta_{i+1}-eta_i)))``."""
    _check_path(path)
    if not beta > 0:
        raise ValueError("beta must be positive")
    n = path.dims
    x = transform_array(path.values, path.grid.dt, scheme, beta=beta)
    return VectorPath(path.grid, x, undefined_prefix(n) if n > 1 else 0)


# ---------------------------------------------------------------------------
# Zero temperature
# ---------------------------------------------------------------------------


def _pitman_inplace(x, i):
    d = x[..., :, i + 1] - x[..., :, i]
    s = np.maximum.accumulate(d, axis=-1)
    x[..., :, i] += s
    x[..., :, i + 1] -= s


def pitman_array(x, record=False):
    x = np.array(x, dtype=float)
    n = x.shape[-1]
    pat = np.empty(x.shape[:-1] + (tri_size(n),)) if record else None
    if record:
        pat[..., 0] = x[..., 0]
    for k in range(2, n + 1):
        for i in level_word(k):
            _pitman_inplace(x, i)
        if record:
            a = tri_index(k, 1)
            pat[..., a: a + k] = x[..., :k]
    return (x, pat) if record else x


def _check_origin(path):
    if path.start or np.any(np.abs(path.values[0]) > 1e-12):
        raise ValueError("Pitman transforms require path(0) = 0")


def pitman_pi(path: VectorPath, i: int) -> VectorPath:
    """``P_i eta = eta + sup_{s<=t}(eta_{i+1} - eta_i)(s) (e_i - e_{i+1})``."""
    _check_path(path)
    _check_origin(path)
    if not 1 <= i <= path.dims - 1:
        raise ValueError("index out of range")
    x = np.array(path.values)
    _pitman_inplace(x, i - 1)
    return VectorPath(path.grid, x)


def gamma_k(path: VectorPath, k: int) -> PatternTrajectory:
    """Zero-temperature pattern ``((Gamma_j eta)_i)_{i <= j <= k}``."""
    _check_path(path)
    _check_origin(path)
    if not 1 <= k <= path.dims:
        raise ValueError("level out of range")
    _, pat = pitman_array(path.values[:, :k], record=True)
    return PatternTrajectory(path.grid, k, pat, 0)


def pitman_transform(path: VectorPath, return_pattern: bool = False):
    _check_path(path)
    _check_origin(path)
    x, pat = pitman_array(path.values, record=True)
    out = VectorPath(path.grid, x)
    if return_pattern:
        return out, PatternTrajectory(path.grid, path.dims, pat, 0)
    return out


def is_interlacing(pattern_values, n, tol=0.0) -> np.ndarray:
    """Per-row check of ``T_{k+1,i} >= T_{k,i} >= T_{k+1,i+1}`` (and rows ordered)."""
    v = np.asarray(pattern_values)
    ok = np.ones(v.shape[:-1], dtype=bool)
    for k in range(1, n):
        for i in range(1, k + 1):
            upper = v[..., tri_index(k + 1, i)]
            mid = v[..., tri_index(k, i)]
            lower = v[..., tri_index(k + 1, i + 1)]
            ok &= (upper >= mid - tol) & (mid >= lower - tol)
    return ok


# ---------------------------------------------------------------------------
# Offset transforms (process started from a pattern)
# ---------------------------------------------------------------------------


def offset_parameters(z: TriangularArray) -> list:
    """Per-level offsets ``(xi_1..xi_{k-1}, c_k)`` used by :func:`transform_t_offset`.

    ``xi_i = sum_{j<=i} (z_{k,j} - z_{k-1,j})`` and the new coordinate starts at
    ``c_k = sum_j z_{k,j} - sum_j z_{k-1,j}``.
    """
    out = []
    for k in range(2, z.n + 1):
        up = z.row(k)
        low = z.row(k - 1)
        xi = np.cumsum(up[:-1] - low)
        out.append((xi, float(up.sum() - low.sum())))
    return out


def offset_pattern_array(w, z_rows, dt, scheme="staggered"):
    """Batched offset construction.

    ``w`` has shape ``(..., M+1, N)`` (paths from 0); ``z_rows`` is a list of
    arrays, row ``k`` of shape ``(..., k)``.  Returns ``(..., M+1, N(N+1)/2)``.
    """
    _check_scheme(scheme)
    w = np.asarray(w, dtype=float)
    n = w.shape[-1]
    pat = np.empty(w.shape[:-1] + (tri_size(n),))
    prev = z_rows[0][..., 0][..., None] + w[..., :, :1]
    pat[..., 0] = prev[..., 0]
    for k in range(2, n + 1):
        up = np.asarray(z_rows[k - 1], dtype=float)
        low = np.asarray(z_rows[k - 2], dtype=float)
        xi = np.cumsum(up[..., :-1] - low, axis=-1)
        c = up.sum(-1) - low.sum(-1)
        v = np.concatenate([prev, c[..., None, None] + w[..., :, k - 1: k]], axis=-1)
        q = [0.0] * k
        for i in range(k - 2, -1, -1):
            _ti_inplace(v, q, i, dt, scheme, offset=xi[..., i])
        a = tri_index(k, 1)
        pat[..., a: a + k] = v
        prev = v
    return pat


def transform_t_offset(path: VectorPath, z: TriangularArray,
                       scheme: str = "staggered") -> PatternTrajectory:
    """Pattern trajectory started from ``z`` and driven by ``path``.

    The result solves the triangular system with ``Z(0) = z`` exactly at
    ``t_0``.  When every row of ``z`` has mean ``z_{1,1}`` the offsets reduce
    to ``xi_{k,i} = z_{k,i} - z_{k+1,i+1}`` and the bottom row equals
    ``z_{1,1} + (T^z W)(t)``.
    """
    _check_path(path)
    if path.start or np.any(np.abs(path.values[0]) > 1e-12):
        raise ValueError("driving path must start at 0")
    if not isinstance(z, TriangularArray) or z.n != path.dims:
        raise ValueError("z must be a TriangularArray matching the path dimension")
    pat = offset_pattern_array(path.values, z.rows(), path.grid.dt, scheme)
    return PatternTrajectory(path.grid, z.n, pat, 0)


def transform_t_xi(path: VectorPath, xi_levels, scheme: str = "staggered") -> VectorPath:
    """Offset transform with explicit offsets: level k applies
    ``T_1^{xi[k][0]} o ... o T_{k-1}^{xi[k][k-2]}`` to the level k-1 output."""
    _check_path(path)
    x = np.array(path.values, dtype=float)
    n = path.dims
    q = [0.0] * n
    for k in range(2, n + 1):
        xs = np.atleast_1d(np.asarray(xi_levels[k - 2], dtype=float))
        for i in range(k - 2, -1, -1):
            _ti_inplace(x, q, i, path.grid.dt, scheme, offset=xs[i])
    return VectorPath(path.grid, x, 0)


# ---------------------------------------------------------------------------
# Structural checks
# ---------------------------------------------------------------------------


def _window(grid: TimeGrid, t_min: float, first: int) -> slice:
    m0 = max(first, int(math.ceil(t_min / grid.dt - 1e-9)))
    return slice(m0, grid.steps + 1)


def braid_residual(path: VectorPath, i: int, t_min: float = 0.1,
                   scheme: str = "staggered") -> float:
    """Sup over ``t >= t_min`` of ``|T_i T_{i+1} T_i eta - T_{i+1} T_i T_{i+1} eta|``."""
    n = path.dims
    if n < 3 or not 1 <= i <= n - 2:
        raise ValueError("braid check needs N >= 3 and 1 <= i <= N-2")
    lhs = transform_word(path, [i, i + 1, i], scheme).values
    rhs = transform_word(path, [i + 1, i, i + 1], scheme).values
    w = _window(path.grid, t_min, undefined_prefix(n))
    return float(np.max(np.abs(lhs[w] - rhs[w])))


def verify_braid(path: VectorPath, i: int, factors=(100, 10, 1), t_min: float = 0.1,
                 scheme: str = "staggered") -> dict:
    """Braid residual on nested subsampled grids of ``path``.

    ``factors`` are subsampling factors of the input grid.  The fitted
    log-log slope of residual against dt is reported (``nan`` when the
    residuals are at round-off level).
    """
    rows = []
    for f in factors:
        p = path.coarsen(f) if f != 1 else path
        rows.append((p.grid.dt, braid_residual(p, i, t_min, scheme)))
    dts = np.array([r[0] for r in rows])
    res = np.array([r[1] for r in rows])
    exact = bool(np.all(res <= 1e-12))
    slope = float("nan")
    if not exact and np.all(res > 0):
        slope = float(np.polyfit(np.log(dts), np.log(res), 1)[0])
    return {"dt": dts.tolist(), "residual": res.tolist(), "slope": slope,
            "exact_on_grid": exact, "scheme": scheme}


def reflect(values):
    """``eta -> -sigma_0 eta``: reverse the coordinates and negate."""
    return -np.asarray(values)[..., ::-1]


def verify_symmetry(path: VectorPath, t_min: float = 0.1, scheme: str = "staggered") -> dict:
    """Residual of ``(-sigma_0) o T = T o (-sigma_0)`` over ``t >= t_min``."""
    _check_path(path)
    n = path.dims
    if n == 1:
        return {"residual": 0.0, "scheme": scheme}
    dt = path.grid.dt
    lhs = reflect(transform_array(path.values, dt, scheme))
    rhs = transform_array(reflect(path.values), dt, scheme)
    w = _window(path.grid, t_min, undefined_prefix(n))
    return {"residual": float(np.max(np.abs(lhs[w] - rhs[w]))), "scheme": scheme}


def sum_residual(path: VectorPath, scheme: str = "staggered") -> float:
    """Max deviation of the coordinate sum of ``T eta`` from that of ``eta``."""
    x = transform_array(path.values, path.grid.dt, scheme)
    w = slice(undefined_prefix(path.dims), None)
    return float(np.max(np.abs(x[w].sum(-1) - path.values[w].sum(-1))))


# ---------------------------------------------------------------------------
# Greene sums
# ---------------------------------------------------------------------------

_GREENE_SIZES = {(2, 1), (2, 2), (3, 1), (3, 2), (3, 3)}


def _cum_lse(v):
    head = np.full(v.shape[:-1] + (1,), -np.inf)
    return np.logaddexp.accumulate(np.concatenate([head, v], axis=-1), axis=-1)


def greene_k_sum(env: VectorPath, k: int, m: int | None = None, all_times: bool = False):
    """``log int exp(sum_j E(phi_j))`` over k non-intersecting up/right paths.

    ``env`` holds ``(B_1, ..., B_N)``.  Path ``j`` runs from level ``j`` at
    time 0 to level ``N - k + j`` at time ``t``; a jump at grid panel ``s``
    collects ``B_level`` up to ``t_{s-1}`` on the old level and from ``t_s``
    on the new one, with weight ``dt``.  For (N, k) = (3, 2) the paths are
    disjoint when the lower path leaves level 2 no later than the upper one
    enters it.  Equals ``sum_{i<=k} (T W)_i`` with ``W = (B_N, ..., B_1)``.
    """
    _check_path(env)
    n = env.dims
    if (n, k) not in _GREENE_SIZES:
        raise NotImplementedError(f"Greene sum not supported for (N, k) = ({n}, {k})")
    B = env.values
    ldt = math.log(env.grid.dt)
    if k == n:
        out = B.sum(-1)
    elif n == 2:  # (2, 1)
        acc = _cum_lse(ldt + B[:-1, 0] - B[1:, 1])
        out = B[:, 1] + acc
    elif k == 1:  # (3, 1): jumps 1 <= j2 < j3 <= m
        inner = _cum_lse(ldt + B[:-1, 0] - B[1:, 1])          # index s: sum_{j2<=s}
        outer = _cum_lse(ldt + B[:-1, 1] + inner[:-1] - B[1:, 2])
        out = B[:, 2] + outer
    else:  # (3, 2): lower path jumps 2->3 at r, upper 1->2 at s, r <= s
        low = _cum_lse(ldt + B[:-1, 1] - B[1:, 2])            # sum_{r<=s}
        upper = _cum_lse(ldt + B[:-1, 0] - B[1:, 1] + low[1:])
        out = B[:, 1] + B[:, 2] + upper
    if all_times:
        return np.asarray(out, dtype=float)
    return float(out[env.grid.steps if m is None else m])
