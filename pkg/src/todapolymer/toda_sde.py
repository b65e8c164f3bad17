"""Euler-Maruyama simulation of the Toda-type diffusions.

Four processes are covered:

* the triangular process ``Z`` driven by one Brownian motion per row,
* the symmetric process ``S`` with one independent noise per entry,
* the N = 2 Whittaker diffusion with generator ``L_nu`` (closed-form drift),
* the N = 2 pair ``(X, Y)`` whose first component is again ``L_nu``.

Each ``simulate_*`` function returns a full trajectory for a single replica
when ``reps`` is None, and the ``(reps, dims)`` array of endpoints at the
horizon otherwise.  Batched runs draw all replicas from the one stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .core_paths import DriftVector, RngStream, TimeGrid, VectorPath, as_drift
from .grsk import PatternTrajectory, TriangularArray, tri_index, tri_size
from .whittaker import GibbsPatternLaw, log_macdonald_k, rho, sample_sigma

EULER_GAMMA = 0.5772156649015329


class ExplosionError(FloatingPointError):
    """An exponent in a drift term exceeded the guard."""

    def __init__(self, time: float, exponent: float):
        super().__init__(f"explosion guard tripped at t={time:.6g} (exponent {exponent:.3g})")
        self.time = time
        self.exponent = exponent


@dataclass(frozen=True)
class SdeConfig:
    """Fixed-step Euler-Maruyama settings; ``guard`` bounds drift exponents."""

    dt: float = 1e-3
    horizon: float = 1.0
    guard: float = 50.0

    def __post_init__(self):
        if not (self.dt > 0 and self.horizon > 0 and self.guard > 0):
            raise ValueError("dt, horizon and guard must be positive")
        TimeGrid.from_dt(self.dt, self.horizon)

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid.from_dt(self.dt, self.horizon)

    @property
    def steps(self) -> int:
        return self.grid.steps


@dataclass(frozen=True)
class EntranceSpec:
    """Start from ``sigma^{x0}_nu`` with ``x0 = -M rho^N``."""

    m: float = 10.0


def _rng(rng) -> RngStream:
    return rng if isinstance(rng, RngStream) else RngStream(int(rng))


def _nu(nu, n) -> np.ndarray:
    return as_drift(nu.nu if isinstance(nu, DriftVector) else nu, n)


def _infer_n(init, nu) -> int:
    if isinstance(init, TriangularArray):
        return init.n
    if isinstance(nu, DriftVector):
        return len(nu)
    return np.atleast_1d(np.asarray(nu, dtype=float)).size


# ---------------------------------------------------------------------------
# Triangular process Z
# ---------------------------------------------------------------------------


def _coupling(n: int):
    """Index arrays for ``a_{k,j} = exp(z_{k,j+1} - z_{k-1,j})``, 1 <= j < k.

    Returns ``(upper, lower, incidence)`` with ``incidence`` the matrix that
    maps the vector of ``a`` terms to the local drifts
    ``a_{k,i} [i < k] - a_{k,i-1} [i > 1]``.
    """
    upper, lower, plus, minus = [], [], [], []
    for k in range(2, n + 1):
        for j in range(1, k):
            upper.append(tri_index(k, j + 1))
            lower.append(tri_index(k - 1, j))
            plus.append(tri_index(k, j))
            minus.append(tri_index(k, j + 1))
    inc = np.zeros((len(upper), tri_size(n)))
    inc[np.arange(len(upper)), plus] += 1.0
    inc[np.arange(len(upper)), minus] -= 1.0
    return np.array(upper, dtype=int), np.array(lower, dtype=int), inc


def _diag_positions(n: int) -> np.ndarray:
    return np.array([tri_index(k, k) for k in range(1, n + 1)], dtype=int)


def _guarded_exp(arg, guard, t):
    if arg.size:
        top = float(np.max(arg))
        if not top <= guard:
            raise ExplosionError(t, top)
    return np.exp(arg)


def drift_coefficients(state: TriangularArray, nu) -> TriangularArray:
    """Drifts ``b_{k,i}`` of the triangular generator at ``state``.

    ``b_{1,1} = nu_1``; for ``k >= 2`` and ``a_{k,j} = exp(z_{k,j+1} - z_{k-1,j})``,
    ``b_{k,1} = a_{k,1}``, ``b_{k,i} = a_{k,i} - a_{k,i-1}`` for ``1 < i < k``
    and ``b_{k,k} = nu_k - a_{k,k-1}``.  These are the local terms that each
    row adds on top of the increments of the row above.
    """
    n = state.n
    nu = _nu(nu, n)
    up, lo, inc = _coupling(n)
    z = state.entries
    b = np.exp(z[up] - z[lo]) @ inc
    b[_diag_positions(n)] += nu
    return TriangularArray(n, b)


def _z_increment(v, nu, dt, dw, coupling, n, guard, t):
    up, lo, inc = coupling
    a = _guarded_exp(v[:, up] - v[:, lo], guard, t)
    d = (a @ inc) * dt
    diag = _diag_positions(n)
    d[:, diag] += dw
    for k in range(2, n + 1):
        a0, b0 = tri_index(k - 1, 1), tri_index(k, 1)
        d[:, b0: b0 + k - 1] += d[:, a0: a0 + k - 1]
    return d


def _initial_values(init, nu, n, rng, reps):
    count = 1 if reps is None else reps
    if isinstance(init, EntranceSpec):
        return entrance_starts(init.m, nu, rng.child(1), count)
    if isinstance(init, TriangularArray):
        return np.tile(init.entries, (count, 1))
    v = np.asarray(init, dtype=float)
    if v.shape == (count, tri_size(n)):
        return v.copy()
    raise ValueError("init must be a TriangularArray, an EntranceSpec or a (reps, size) array")


def simulate_triangular_z(nu, init, cfg: SdeConfig, rng, reps: int | None = None,
                          noise: VectorPath | None = None):
    """Triangular process ``Z`` by Euler-Maruyama.

    ``dZ_{1,1} = dW_1`` and row ``k`` copies the increments of row ``k-1``
    plus its local drift, with ``dZ_{k,k} = dW_k - a_{k,k-1} dt`` where ``W``
    is Brownian motion with drift ``nu``.  Row sums telescope, so the bottom
    row sum moves exactly by ``sum_k dW_k``.

    Parameters
    ----------
    init : TriangularArray, EntranceSpec or array
        Starting state; an :class:`EntranceSpec` draws ``sigma^{x0}_nu``.
    noise : VectorPath, optional
        Driving path ``W`` (with its drift) for a single replica.  Its grid
        must match ``cfg``.

    Returns
    -------
    PatternTrajectory if ``reps`` is None, else an array ``(reps, n(n+1)/2)``
    of states at the horizon.
    """
    rng = _rng(rng)
    n = _infer_n(init, nu)
    nu = _nu(nu, n)
    grid = cfg.grid
    dt = grid.dt
    if noise is not None:
        if reps is not None:
            raise ValueError("explicit noise drives a single replica")
        if noise.dims != n or noise.grid.steps != grid.steps:
            raise ValueError("noise path does not match the configuration")
        dws = np.diff(noise.values, axis=0)
    v = _initial_values(init, nu, n, rng, reps)
    coupling = _coupling(n)
    record = reps is None
    if record:
        out = np.empty((grid.steps + 1, tri_size(n)))
        out[0] = v[0]
    sq = math.sqrt(dt)
    count = v.shape[0]
    for m in range(grid.steps):
        if noise is not None:
            dw = dws[m][None, :]
        else:
            dw = rng.normal((count, n)) * sq + nu * dt
        v = v + _z_increment(v, nu, dt, dw, coupling, n, cfg.guard, m * dt)
        if record:
            out[m + 1] = v[0]
    if record:
        return PatternTrajectory(grid, n, out, 0)
    return v


def entrance_point(m: float, n: int) -> np.ndarray:
    """``x0 = -M rho^N``."""
    return -float(m) * rho(n)


def entrance_starts(m: float, nu, rng, count: int) -> np.ndarray:
    """``count`` flat arrays drawn from ``sigma^{x0}_nu`` at ``x0 = -M rho^N``."""
    rng = _rng(rng)
    if not m > 0:
        raise ValueError("M must be positive")
    n = len(nu) if isinstance(nu, DriftVector) else np.atleast_1d(np.asarray(nu, dtype=float)).size
    law = GibbsPatternLaw(entrance_point(m, n), _nu(nu, n))
    return sample_sigma(law, rng, count).values


def entrance_start(m: float, nu, rng) -> TriangularArray:
    """One draw from ``sigma^{-M rho^N}_nu``.

    For large ``M`` the differences ``zeta_{k,i} - zeta_{k+1,i+1}`` tend to
    minus infinity, which approximates the start from minus infinity.
    """
    vals = entrance_starts(m, nu, rng, 1)
    n = int(round((math.sqrt(8 * vals.shape[1] + 1) - 1) / 2))
    return TriangularArray(n, vals[0])


def pattern_gaps(values: np.ndarray, n: int) -> np.ndarray:
    """Differences ``xi_{k,i} = z_{k,i} - z_{k+1,i+1}`` for ``1 <= i <= k < n``."""
    values = np.atleast_2d(values)
    cols = [values[:, tri_index(k, i)] - values[:, tri_index(k + 1, i + 1)]
            for k in range(1, n) for i in range(1, k + 1)]
    return np.column_stack(cols) if cols else np.empty((values.shape[0], 0))


# ---------------------------------------------------------------------------
# Symmetric process S
# ---------------------------------------------------------------------------


def _s_coupling(n: int):
    """Index arrays for the two families of exponentials in the S system.

    ``exp(s_{k-1,i} - s_{k,i})`` pushes ``s_{k,i}`` up (``i < k``) and
    ``exp(s_{k,i} - s_{k-1,i-1})`` pushes it down (``i > 1``).
    """
    pu, pl, pt, mu, ml, mt = [], [], [], [], [], []
    for k in range(2, n + 1):
        for i in range(1, k):
            pu.append(tri_index(k - 1, i))
            pl.append(tri_index(k, i))
            pt.append(tri_index(k, i))
        for i in range(2, k + 1):
            mu.append(tri_index(k, i))
            ml.append(tri_index(k - 1, i - 1))
            mt.append(tri_index(k, i))
    return [np.array(a, dtype=int) for a in (pu, pl, pt, mu, ml, mt)]


def simulate_symmetric_s(nu, init, cfg: SdeConfig, rng, reps: int | None = None):
    """Symmetric process ``S`` with independent standard noises ``W_{k,i}``.

    ``dS_{k,i} = dW_{k,i} + (exp(S_{k-1,i} - S_{k,i}) - exp(S_{k,i} - S_{k-1,i-1})) dt``
    with the first term absent for ``i = k`` and the second absent for
    ``i = 1``, plus a constant drift ``nu_k`` on every entry of row ``k``.
    Row ``k`` given rows ``1..k-1`` then has the generator that intertwines
    with the kernel ``Q_{nu_k}``, so the conditional law of ``S(t)`` given
    its bottom row stays ``sigma^x_nu``.  Output conventions as in
    :func:`simulate_triangular_z`.
    """
    rng = _rng(rng)
    n = _infer_n(init, nu)
    nu = _nu(nu, n)
    grid = cfg.grid
    dt = grid.dt
    size = tri_size(n)
    v = _initial_values(init, nu, n, rng, reps)
    pu, pl, pt, mu, ml, mt = _s_coupling(n)
    base = np.concatenate([np.full(k, nu[k - 1]) for k in range(1, n + 1)])
    record = reps is None
    if record:
        out = np.empty((grid.steps + 1, size))
        out[0] = v[0]
    sq = math.sqrt(dt)
    count = v.shape[0]
    for m in range(grid.steps):
        t = m * dt
        b = np.broadcast_to(base, v.shape).copy()
        if pu.size:
            np.add.at(b, (slice(None), pt), _guarded_exp(v[:, pu] - v[:, pl], cfg.guard, t))
            np.subtract.at(b, (slice(None), mt), _guarded_exp(v[:, mu] - v[:, ml], cfg.guard, t))
        v = v + b * dt + rng.normal((count, size)) * sq
        if record:
            out[m + 1] = v[0]
    if record:
        return PatternTrajectory(grid, n, out, 0)
    return v


# ---------------------------------------------------------------------------
# K-diffusions: drift d/dy log K_mu(e^{-y})
# ---------------------------------------------------------------------------


def k_log_derivative(mu: float, y) -> np.ndarray:
    """``d/dy log K_mu(e^{-y})`` from the recurrence ``-2K' = K_{mu-1} + K_{mu+1}``.

    With ``z = e^{-y}`` this is ``z (K_{mu-1}(z) + K_{mu+1}(z)) / (2 K_mu(z))``.
    It grows like ``e^{-y} + 1/2`` as ``y -> -inf`` and tends to ``|mu|`` as
    ``y -> +inf`` (like ``1/y`` when ``mu = 0``).
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    z = np.exp(-y)
    lk = log_macdonald_k(mu, z)
    r1 = np.exp(log_macdonald_k(mu - 1.0, z) - lk)
    r2 = np.exp(log_macdonald_k(mu + 1.0, z) - lk)
    return 0.5 * z * (r1 + r2)


class KDrift:
    """Tabulated ``L'(y) = d/dy log K_mu(e^{-y})`` split as ``e^{-y} + r(y)``.

    ``r`` is bounded and smooth; it is tabulated on a 0.01 grid over
    ``[lo, hi]`` and continued by its asymptotic forms outside.  The stiff
    part ``e^{-y}`` is integrated exactly by the simulators.
    """

    def __init__(self, mu: float, lo: float = -30.0, hi: float = 60.0, step: float = 0.01):
        self.mu = abs(float(mu))
        self.lo, self.hi = float(lo), float(hi)
        m = int(round((hi - lo) / step))
        self.y = np.linspace(lo, hi, m + 1)
        self.r = self._remainder(self.y)

    def _large_z(self, z):
        a = (4.0 * self.mu**2 - 1.0) / 8.0
        b = (4.0 * self.mu**2 - 1.0) * (4.0 * self.mu**2 - 9.0) / 128.0
        return 0.5 + a / z + (2.0 * b - a * a) / z**2

    def _remainder(self, y):
        y = np.asarray(y, dtype=float)
        out = np.empty_like(y)
        big = y < -math.log(1e3)
        out[big] = self._large_z(np.exp(-y[big]))
        ys = y[~big]
        out[~big] = k_log_derivative(self.mu, ys) - np.exp(-ys)
        return out

    def remainder(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        out = np.interp(y, self.y, self.r)
        below = y < self.lo
        if np.any(below):
            out[below] = self._large_z(np.exp(-y[below]))
        above = y > self.hi
        if np.any(above):
            out[above] = (1.0 / (y[above] + math.log(2.0) - EULER_GAMMA)
                          if self.mu == 0 else self.mu)
        return out

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.exp(-y) + self.remainder(y)


def _k_coordinate(drift: KDrift, y0, c: float, sigma: float, dt: float, steps: int,
                  rng: RngStream, count: int, record: bool):
    """Split-step solver for ``dY = c L'(Y) dt + sigma dB``.

    The flow of ``dY = c e^{-Y} dt`` is ``Y -> log(e^Y + c dt)``; it is applied
    exactly, then the bounded remainder and the noise by an Euler step.
    ``y0 = -inf`` is allowed and gives the entrance from minus infinity.
    """
    y = np.broadcast_to(np.asarray(y0, dtype=float), (count,)).copy()
    path = np.empty((steps + 1, count)) if record else None
    if record:
        path[0] = y
    sq = math.sqrt(dt)
    with np.errstate(divide="ignore"):
        for m in range(steps):
            y = np.logaddexp(y, math.log(c * dt))
            y = y + c * drift.remainder(y) * dt + sigma * sq * rng.normal(count)
            if record:
                path[m + 1] = y
    return path if record else y


def simulate_k_diffusion(mu: float, y0, cfg: SdeConfig, rng, reps: int | None = None,
                         drift: KDrift | None = None):
    """Diffusion with generator ``1/2 d^2/dy^2 + L'(y) d/dy``.

    This is the law of ``log Z^{(mu)}`` for ``Z^{(mu)}_t = int_0^t exp(2B_s - B_t) ds``
    when started at ``y0 = -inf``.
    """
    rng = _rng(rng)
    drift = drift or KDrift(mu)
    grid = cfg.grid
    count = 1 if reps is None else reps
    res = _k_coordinate(drift, y0, 1.0, 1.0, grid.dt, grid.steps, rng, count, reps is None)
    if reps is None:
        if not np.all(np.isfinite(res[1:])):
            raise FloatingPointError("k-diffusion produced non-finite values")
        start = 0 if np.isfinite(res[0, 0]) else 1
        res[:start] = res[start]
        return VectorPath(grid, res[:, 0], start)
    return res


def whittaker_drift_n2(nu, x) -> np.ndarray:
    """Drift ``grad log psi_nu(x)`` of the N = 2 Whittaker diffusion."""
    nu = _nu(nu, 2)
    x = np.asarray(x, dtype=float)
    d = x[..., 0] - x[..., 1]
    g = k_log_derivative(nu[0] - nu[1], d / 2.0 - math.log(2.0)).reshape(d.shape)
    half = 0.5 * (nu[0] + nu[1])
    return np.stack([half + 0.5 * g, half - 0.5 * g], axis=-1)


def simulate_whittaker_diffusion_n2(nu, x0, cfg: SdeConfig, rng, reps: int | None = None,
                                    drift: KDrift | None = None):
    """N = 2 diffusion with generator ``L_nu = 1/2 Delta + grad log psi_nu . grad``.

    In the coordinates ``s = x1 + x2`` and ``D = (x1 - x2)/2 - log 2``, the
    sum is Brownian motion with drift ``nu1 + nu2`` and variance ``2t``, and
    ``dD = 1/2 L'(D) dt + dB / sqrt(2)`` with ``L'`` the log-derivative of
    ``K_{nu1 - nu2}(e^{-y})``.  ``x0 = (-inf, inf)`` starts the difference
    from minus infinity with the sum at 0.
    """
    rng = _rng(rng)
    nu = _nu(nu, 2)
    x0 = np.asarray(x0, dtype=float)
    drift = drift or KDrift(nu[0] - nu[1])
    grid = cfg.grid
    count = 1 if reps is None else reps
    record = reps is None
    d0 = (x0[0] - x0[1]) / 2.0 - math.log(2.0)
    s0 = float(x0[0] + x0[1]) if np.all(np.isfinite(x0)) else 0.0
    dd = _k_coordinate(drift, d0, 0.5, math.sqrt(0.5), grid.dt, grid.steps, rng.child(2), count, record)
    inc = rng.child(3).normal((grid.steps, count)) * math.sqrt(2.0 * grid.dt) + (nu[0] + nu[1]) * grid.dt
    if record:
        s = s0 + np.concatenate([[0.0], np.cumsum(inc[:, 0])])
        diff = 2.0 * (dd[:, 0] + math.log(2.0))
        start = 0 if np.isfinite(diff[0]) else 1
        diff[:start] = diff[start]
        vals = np.column_stack([(s + diff) / 2.0, (s - diff) / 2.0])
        return VectorPath(grid, vals, start)
    s = s0 + inc.sum(axis=0)
    diff = 2.0 * (dd + math.log(2.0))
    return np.column_stack([(s + diff) / 2.0, (s - diff) / 2.0])


# ---------------------------------------------------------------------------
# The (X, Y) pair at N = 2
# ---------------------------------------------------------------------------


def xy_initial_law_normaliser(nu, x0) -> float:
    """``int Q_{nu2}(x0, y) psi^{(1)}_{nu1}(y) dy``; equals ``psi^{(2)}_nu(x0)``."""
    nu = _nu(nu, 2)
    x0 = np.asarray(x0, dtype=float)
    law = GibbsPatternLaw(x0, nu)
    # Q_{nu2}(x0, y) exp(nu1 y) is exp of the N = 2 energy at T_{1,1} = y
    y0 = float(np.mean(x0))
    f0 = float(law.energy(np.array([[y0]]))[0])
    with np.errstate(over="ignore"):
        val, _ = quad(lambda y: math.exp(float(law.energy(np.array([[y]]))[0]) - f0),
                      -np.inf, np.inf, limit=200)
    return val * math.exp(f0)


def simulate_xy_pair_n2(nu, x0, cfg: SdeConfig, rng, reps: int | None = None):
    """Pair ``(X, Y)``: ``Y`` is Brownian motion with drift ``nu1`` and

    ``dX1 = dY + e^{X2 - Y} dt``, ``dX2 = dW + (nu2 - e^{X2 - Y}) dt``,

    started at ``X(0) = x0`` with ``Y(0)`` drawn from the density
    proportional to ``Q_{nu2}(x0, y) e^{nu1 y}``.  ``X`` then has generator
    ``L_nu`` started at ``x0``.

    Returns ``(X, Y)`` as paths for one replica, or endpoint arrays of
    shapes ``(reps, 2)`` and ``(reps,)``.
    """
    rng = _rng(rng)
    nu = _nu(nu, 2)
    x0 = np.asarray(x0, dtype=float)
    grid = cfg.grid
    dt = grid.dt
    count = 1 if reps is None else reps
    y = sample_sigma(GibbsPatternLaw(x0, nu), rng.child(1), count).values[:, 0].copy()
    x = np.tile(x0, (count, 1))
    record = reps is None
    if record:
        xs = np.empty((grid.steps + 1, 2))
        ys = np.empty(grid.steps + 1)
        xs[0], ys[0] = x[0], y[0]
    sq = math.sqrt(dt)
    for m in range(grid.steps):
        e = _guarded_exp(x[:, 1] - y, cfg.guard, m * dt)
        noise = rng.normal((count, 2)) * sq
        dy = nu[0] * dt + noise[:, 0]
        x = x + np.column_stack([dy + e * dt, noise[:, 1] + (nu[1] - e) * dt])
        y = y + dy
        if record:
            xs[m + 1], ys[m + 1] = x[0], y[0]
    if record:
        return VectorPath(grid, xs, 0), VectorPath(grid, ys, 0)
    return x, y


# ---------------------------------------------------------------------------
# Direct constructions from Brownian motions
# ---------------------------------------------------------------------------


def _running_log_trapezoid(prev_log, f_prev, f_next, dt):
    return np.logaddexp(prev_log, math.log(dt / 2.0) + np.logaddexp(f_prev, f_next))


def matsumoto_yor_log_z(mu: float, cfg: SdeConfig, rng, reps: int) -> np.ndarray:
    """``log Z^{(mu)}_T = log int_0^T exp(2B_s) ds - B_T`` with ``B`` of drift ``mu``.

    The integral uses the trapezoid rule on the simulation grid.
    """
    rng = _rng(rng)
    grid = cfg.grid
    dt = grid.dt
    sq = math.sqrt(dt)
    b = np.zeros(reps)
    acc = np.full(reps, -np.inf)
    for _ in range(grid.steps):
        nb = b + mu * dt + sq * rng.normal(reps)
        acc = _running_log_trapezoid(acc, 2.0 * b, 2.0 * nb, dt)
        b = nb
    return acc - b


def symmetric_pair_from_bms(cfg: SdeConfig, rng, reps: int, times=None) -> tuple:
    """``X = B1 + log int e^{B2 - B1}`` and ``Y = B3 - log int e^{B3 - B2}``.

    ``B1, B2, B3`` are independent standard Brownian motions.  Returns the
    values at the horizon, or arrays ``(len(times), reps)`` at the given
    grid times.
    """
    rng = _rng(rng)
    grid = cfg.grid
    dt = grid.dt
    sq = math.sqrt(dt)
    marks = None if times is None else [grid.index(t) for t in times]
    if marks is not None and min(marks) < 1:
        raise ValueError("times must be positive")
    b = np.zeros((reps, 3))
    i1 = np.full(reps, -np.inf)
    i2 = np.full(reps, -np.inf)
    xs, ys = {}, {}
    for m in range(1, grid.steps + 1):
        nb = b + sq * rng.normal((reps, 3))
        i1 = _running_log_trapezoid(i1, b[:, 1] - b[:, 0], nb[:, 1] - nb[:, 0], dt)
        i2 = _running_log_trapezoid(i2, b[:, 2] - b[:, 1], nb[:, 2] - nb[:, 1], dt)
        b = nb
        if marks is not None and m in marks:
            xs[m], ys[m] = b[:, 0] + i1, b[:, 2] - i2
    if marks is None:
        return b[:, 0] + i1, b[:, 2] - i2
    return np.array([xs[m] for m in marks]), np.array([ys[m] for m in marks])
