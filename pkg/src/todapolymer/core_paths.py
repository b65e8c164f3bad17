"""Time grids, seeded random streams, Brownian paths and log-domain integrals.

Every stochastic routine in the package draws its randomness from an
:class:`RngStream`, a counter-based Philox generator keyed by the pair
``(seed, stream)``.  Replica ``r`` of any simulation uses stream ``r``, so
results do not depend on how replicas are split across worker threads.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtri

_MASK64 = (1 << 64) - 1
_TWO53 = float(2**53)


# ---------------------------------------------------------------------------
# Time grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_m = m * dt`` on ``[0, horizon]`` with ``steps`` panels."""

    horizon: float
    steps: int

    def __post_init__(self):
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise ValueError("horizon must be positive and finite")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError("steps must be a positive integer")
        object.__setattr__(self, "steps", int(self.steps))

    @classmethod
    def from_dt(cls, dt: float, horizon: float = 1.0) -> "TimeGrid":
        steps = int(round(horizon / dt))
        if steps < 1 or abs(steps * dt - horizon) > 1e-9 * horizon:
            raise ValueError("horizon must be an integer multiple of dt")
        return cls(horizon, steps)

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    @property
    def times(self) -> np.ndarray:
        # m * dt, never a running sum
        return np.arange(self.steps + 1) * self.dt

    def index(self, t: float) -> int:
        """Grid index of time ``t`` (must lie on the grid up to rounding)."""
        m = int(round(t / self.dt))
        if m < 0 or m > self.steps or abs(m * self.dt - t) > 1e-9 * max(1.0, t):
            raise ValueError(f"time {t} is not a grid point")
        return m

    def coarsen(self, factor: int) -> "TimeGrid":
        if self.steps % factor:
            raise ValueError("factor must divide the number of steps")
        return TimeGrid(self.horizon, self.steps // factor)


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------


def _mix(seed: int, tag: int) -> int:
    ss = np.random.SeedSequence([seed & _MASK64, tag & _MASK64, 0x5EED])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class RngStream:
    """Counter-based random stream identified by ``(seed, stream)``.

    Two fresh streams with the same pair produce bit-identical output.
    Draws advance the internal counter, so successive calls return new
    numbers; use :meth:`child` for purpose-specific substreams.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream = int(stream) & _MASK64
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream={self.stream})"

    def child(self, tag: int) -> "RngStream":
        """Independent substream for a named purpose (same replica index)."""
        return RngStream(_mix(self.seed, tag), self.stream)

    def uniform(self, size=None) -> np.ndarray:
        """Uniforms on the open interval (0, 1) with 53-bit resolution."""
        k = self._gen.integers(0, 2**53, size=size, dtype=np.uint64)
        return (k.astype(np.float64) + 0.5) / _TWO53

    def normal(self, size=None) -> np.ndarray:
        """Standard normals by the inverse-CDF transform of :meth:`uniform`."""
        return ndtri(self.uniform(size))

    def chisq(self, df, size=None) -> np.ndarray:
        """Chi-square variates (used by the tridiagonal GUE model)."""
        return self._gen.chisquare(df, size=size)


def replica_streams(seed: int, first: int, count: int) -> list:
    return [RngStream(seed, first + r) for r in range(count)]


def parallel_map(fn: Callable, items: Sequence, threads: int = 1) -> list:
    """Apply ``fn`` to ``items`` preserving order; ``threads`` only affects speed."""
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def chunk_ranges(reps: int, chunk: int) -> list:
    """Split ``range(reps)`` into consecutive ``(start, stop)`` blocks."""
    chunk = max(1, int(chunk))
    return [(a, min(a + chunk, reps)) for a in range(0, reps, chunk)]


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DriftVector:
    nu: np.ndarray

    def __post_init__(self):
        nu = np.atleast_1d(np.asarray(self.nu, dtype=float))
        if nu.ndim != 1 or not np.all(np.isfinite(nu)):
            raise ValueError("drift must be a finite vector")
        object.__setattr__(self, "nu", nu)

    def __len__(self):
        return len(self.nu)


def as_drift(nu, dims: int) -> np.ndarray:
    if nu is None:
        return np.zeros(dims)
    if isinstance(nu, DriftVector):
        nu = nu.nu
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    if nu.shape != (dims,):
        raise ValueError(f"drift must have length {dims}")
    if not np.all(np.isfinite(nu)):
        raise ValueError("drift must be finite")
    return nu


@dataclass(frozen=True)
class VectorPath:
    """Sampled path ``values[m, i] = eta_i(t_m)`` on a :class:`TimeGrid`.

    ``start`` is the first grid index at which the path is defined.  Rows
    before ``start`` hold finite internal boundary values used by the
    transforms and are reported as NaN by :meth:`defined_values`.
    ``orders`` records, per coordinate, the power of ``t`` that
    ``exp(eta_i)`` behaves like near 0 (zero for raw paths).
    """

    grid: TimeGrid
    values: np.ndarray
    start: int = 0
    orders: tuple = field(default=None)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] != self.grid.steps + 1:
            raise ValueError("values must have shape (steps + 1, dims)")
        if not np.all(np.isfinite(v)):
            raise ValueError("path values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.orders is None:
            object.__setattr__(self, "orders", (0.0,) * v.shape[1])
        elif len(self.orders) != v.shape[1]:
            raise ValueError("orders must have one entry per coordinate")

    @property
    def dims(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def defined_values(self) -> np.ndarray:
        out = np.array(self.values)
        out[: self.start] = np.nan
        return out

    def at(self, t: float) -> np.ndarray:
        m = self.grid.index(t)
        if m < self.start:
            return np.full(self.dims, np.nan)
        return np.array(self.values[m])

    def coarsen(self, factor: int) -> "VectorPath":
        if self.start > 0:
            raise ValueError("only raw paths can be subsampled")
        g = self.grid.coarsen(factor)
        return VectorPath(g, self.values[::factor], 0, self.orders)

    def to_csv(self, fh=None) -> str:
        return write_path_csv(self, fh)


def sample_brownian_path(dims: int, drift, grid: TimeGrid, rng: RngStream) -> VectorPath:
    """Brownian motion in R^dims with constant drift, started at 0."""
    if int(dims) != dims or dims < 1:
        raise ValueError("dims must be a positive integer")
    nu = as_drift(drift, dims)
    inc = rng.normal((grid.steps, dims)) * math.sqrt(grid.dt) + nu * grid.dt
    vals = np.vstack([np.zeros((1, dims)), np.cumsum(inc, axis=0)])
    return VectorPath(grid, vals)


def brownian_batch(dims: int, drift, grid: TimeGrid, seed: int, first: int, count: int,
                   tag: int | None = None) -> np.ndarray:
    """Array ``(count, steps + 1, dims)`` of paths for replicas ``first..first+count-1``.

    Replica ``r`` uses ``RngStream(seed, r)`` (or its ``child(tag)``), so the
    batch equals the stacked output of :func:`sample_brownian_path`.
    """
    nu = as_drift(drift, dims)
    out = np.empty((count, grid.steps + 1, dims))
    out[:, 0, :] = 0.0
    sq = math.sqrt(grid.dt)
    for j in range(count):
        rng = RngStream(seed, first + j)
        if tag is not None:
            rng = rng.child(tag)
        inc = rng.normal((grid.steps, dims)) * sq + nu * grid.dt
        np.cumsum(inc, axis=0, out=out[j, 1:, :])
    return out


# ---------------------------------------------------------------------------
# Log-domain integration
# ---------------------------------------------------------------------------


def cumulative_log_integral_exp(f, dt: float) -> np.ndarray:
    """Running ``log int_0^{t_m} exp(f)`` by trapezoid panels, for every m.

    Entry 0 is ``-inf`` (empty integral).  Works along the last axis.
    """
    f = np.asarray(f, dtype=float)
    panels = math.log(dt / 2.0) + np.logaddexp(f[..., :-1], f[..., 1:])
    head = np.full(f.shape[:-1] + (1,), -np.inf)
    return np.logaddexp.accumulate(np.concatenate([head, panels], axis=-1), axis=-1)


def log_integral_exp(f, grid_or_dt, m: int | None = None) -> float:
    """``log int_0^{t_m} exp(f(s)) ds`` with trapezoid panels in log space.

    Parameters
    ----------
    f : array_like
        Samples ``f(t_0), ..., f(t_m)`` (at least ``m + 1`` of them).
    grid_or_dt : TimeGrid or float
        Grid (or its step).
    m : int, optional
        Upper grid index; defaults to the last sample.

    Returns
    -------
    float
        ``-inf`` for ``m = 0`` (log of an empty integral).
    """
    dt = grid_or_dt.dt if isinstance(grid_or_dt, TimeGrid) else float(grid_or_dt)
    f = np.asarray(f, dtype=float)
    if m is None:
        m = f.shape[-1] - 1
    if m < 0 or m >= f.shape[-1]:
        raise ValueError("grid index out of range")
    if m == 0:
        return -math.inf
    return float(cumulative_log_integral_exp(f[: m + 1], dt)[m])


# ---------------------------------------------------------------------------
# Polygamma
# ---------------------------------------------------------------------------

# B_{2k} / (2k) for the digamma asymptotic series
_DIG = [1 / 12, -1 / 120, 1 / 252, -1 / 240, 1 / 132, -691 / 32760, 1 / 12]
# B_{2k} for the trigamma series
_TRI = [1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6]


def _check_positive(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("argument must be positive")
    return x


def digamma(x):
    """Psi(x) = Gamma'(x)/Gamma(x) for x > 0 (recurrence + asymptotic series)."""
    x = _check_positive(x).copy()
    acc = np.zeros_like(x)
    while True:
        small = x < 12.0
        if not np.any(small):
            break
        acc = acc - np.where(small, 1.0 / np.where(small, x, 1.0), 0.0)
        x = np.where(small, x + 1.0, x)
    inv2 = 1.0 / (x * x)
    s = np.zeros_like(x)
    p = inv2.copy()
    for c in _DIG:
        s = s + c * p
        p = p * inv2
    res = np.log(x) - 0.5 / x - s + acc
    return float(res) if res.ndim == 0 else res


def trigamma(x):
    """Psi'(x) for x > 0."""
    x = _check_positive(x).copy()
    acc = np.zeros_like(x)
    while True:
        small = x < 12.0
        if not np.any(small):
            break
        xs = np.where(small, x, 1.0)
        acc = acc + np.where(small, 1.0 / (xs * xs), 0.0)
        x = np.where(small, x + 1.0, x)
    inv = 1.0 / x
    inv2 = inv * inv
    s = np.zeros_like(x)
    p = inv2 * inv
    for c in _TRI:
        s = s + c * p
        p = p * inv2
    res = inv + 0.5 * inv2 + s + acc
    return float(res) if res.ndim == 0 else res


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _fmt(v: float) -> str:
    if not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return format(v, ".17g")


def write_table_csv(header: Sequence[str], rows, fh=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(float(v)) for v in row])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def write_path_csv(path: VectorPath, fh=None) -> str:
    header = ["t"] + [f"x{i + 1}" for i in range(path.dims)]
    rows = np.column_stack([path.times, path.defined_values()])
    return write_table_csv(header, rows, fh)


def read_path_csv(fh) -> VectorPath:
    """Read a path written by :func:`write_path_csv` (must start defined at t=0)."""
    reader = csv.reader(fh)
    header = next(reader)
    if not header or header[0] != "t":
        raise ValueError("path CSV must start with a 't' column")
    data = np.array([[float(v) for v in row] for row in reader if row])
    t = data[:, 0]
    steps = len(t) - 1
    if steps < 1:
        raise ValueError("path CSV needs at least two rows")
    grid = TimeGrid(float(t[-1]), steps)
    if not np.allclose(t, grid.times, rtol=0, atol=1e-12 * max(1.0, t[-1])):
        raise ValueError("path CSV times are not a uniform grid from 0")
    return VectorPath(grid, data[:, 1:])
