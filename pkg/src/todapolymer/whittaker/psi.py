"""gl_N Whittaker functions for N <= 3.

Three independent evaluations are provided:

* ``closed-form``: ``e^{lambda x}`` for N=1 and the Macdonald formula for N=2;
* ``givental``: iterated trapezoid integration of ``exp F_lambda(T)`` over
  the free entries of a triangular array with bottom row ``x``;
* ``mellin-barnes``: the recursion in ``N`` through contour integrals of
  Gamma products along vertical lines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..grsk import tri_index, tri_size
from .special import log_gamma_complex, log_macdonald_k

METHODS = ("closed-form", "givental", "mellin-barnes", "auto")
DROP = 50.0  # log-levels below the peak that are integrated


class ContourError(ValueError):
    """Contour abscissa not to the left of the spectral parameters."""


class UnsupportedSize(ValueError):
    """Requested rank is outside the supported range."""


@dataclass(frozen=True)
class SpectralParam:
    """Complex spectral parameter ``(lambda_1, ..., lambda_N)``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=complex))
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise ValueError("spectral parameter must be a finite vector")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_parts(cls, re, im=None):
        re = np.atleast_1d(np.asarray(re, dtype=float))
        im = np.zeros_like(re) if im is None else np.atleast_1d(np.asarray(im, dtype=float))
        if re.shape != im.shape:
            raise ValueError("real and imaginary parts differ in length")
        return cls(re + 1j * im)

    @classmethod
    def coerce(cls, lam):
        return lam if isinstance(lam, SpectralParam) else cls(lam)

    @property
    def n(self) -> int:
        return self.values.size

    def is_imaginary(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.values.real) <= tol))

    def is_real(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.values.imag) <= tol))

    def __add__(self, other):
        return SpectralParam(self.values + SpectralParam.coerce(other).values)

    def __neg__(self):
        return SpectralParam(-self.values)

    def scaled(self, c: float):
        return SpectralParam(self.values * c)


@dataclass(frozen=True)
class ContourSpec:
    """Vertical integration lines ``Re = abscissas`` truncated to ``|Im| <= U``."""

    abscissas: tuple = ()
    half_width: float = 30.0
    points: int = 400

    def __post_init__(self):
        if self.points < 16:
            raise ValueError("points must be at least 16")
        if not self.half_width > 0:
            raise ValueError("half-width must be positive")
        object.__setattr__(self, "abscissas", tuple(float(a) for a in np.atleast_1d(self.abscissas)))

    def doubled(self):
        return ContourSpec(self.abscissas, 2.0 * self.half_width, 2 * self.points - 1)


@dataclass
class PsiValue:
    """Value of ``psi_lambda(x)`` with its log and a relative error estimate."""

    log_value: complex
    method: str
    est_error: float = float("nan")
    details: dict = field(default_factory=dict)

    @property
    def value(self) -> complex:
        return complex(np.exp(self.log_value))


# ---------------------------------------------------------------------------
# The energy F_lambda on triangular arrays
# ---------------------------------------------------------------------------


def _pairs(n: int):
    """Index pairs ``(p, q)`` of the terms ``exp(T_p - T_q)`` in ``F``."""
    P, Q = [], []
    for k in range(1, n):
        for i in range(1, k + 1):
            P += [tri_index(k, i), tri_index(k + 1, i + 1)]
            Q += [tri_index(k + 1, i), tri_index(k, i)]
    return np.array(P, dtype=int), np.array(Q, dtype=int)


def _linear_coeffs(lam: np.ndarray) -> np.ndarray:
    """Coefficient of each entry in the linear part of ``F_lambda``."""
    n = lam.size
    c = np.empty(tri_size(n), dtype=lam.dtype)
    for k in range(1, n + 1):
        ck = lam[k - 1] - lam[k] if k < n else lam[n - 1]
        for i in range(1, k + 1):
            c[tri_index(k, i)] = ck
    return c


def energy(full, lam) -> np.ndarray:
    """``F_lambda(T)`` for arrays ``T`` given as flat triangular vectors.

    ``F_lambda(T) = sum_k lambda_k (|T_k| - |T_{k-1}|)
    - sum_{k<N} sum_i (e^{T_{k,i} - T_{k+1,i}} + e^{T_{k+1,i+1} - T_{k,i}})``
    with ``|T_k|`` the k-th row sum.
    """
    lam = SpectralParam.coerce(lam).values
    full = np.asarray(full, dtype=float)
    n = lam.size
    c = _linear_coeffs(lam)
    P, Q = _pairs(n)
    lin = full @ c
    if lam.imag.any():
        return lin - np.exp(full[..., P] - full[..., Q]).sum(axis=-1)
    return lin.real - np.exp(full[..., P] - full[..., Q]).sum(axis=-1)


def _maximise_energy(x: np.ndarray, lam_re: np.ndarray, start=None, tol: float = 1e-12,
                     max_iter: int = 200):
    """Newton's method with backtracking for ``max F_lambda`` (real ``lambda``)."""
    n = x.size
    m = tri_size(n - 1)
    c = _linear_coeffs(lam_re.astype(float))
    P, Q = _pairs(n)

    def parts(free):
        full = np.concatenate([free, x])
        e = np.exp(full[P] - full[Q])
        val = full @ c - e.sum()
        g = c.copy()
        np.subtract.at(g, P, e)
        np.add.at(g, Q, e)
        H = np.zeros((full.size, full.size))
        np.add.at(H, (P, P), -e)
        np.add.at(H, (Q, Q), -e)
        np.add.at(H, (P, Q), e)
        np.add.at(H, (Q, P), e)
        return val, g[:m], H[:m, :m]

    if start is None:
        free = np.array([np.mean(x)] * m, dtype=float)
    else:
        free = np.asarray(start, dtype=float).copy()
    val, g, H = parts(free)
    for it in range(max_iter):
        if np.max(np.abs(g), initial=0.0) <= tol:
            return free, val, g, H, it
        step = np.linalg.solve(-H, g)
        t = 1.0
        while True:
            cand = free + t * step
            v2, g2, H2 = parts(cand)
            # near the optimum the value stalls at round-off; accept gradient decrease
            if v2 >= val + 1e-4 * t * (g @ step) or t < 1e-12:
                break
            if v2 >= val - 1e-12 * abs(val) and np.max(np.abs(g2)) < 0.5 * np.max(np.abs(g)):
                break
            t *= 0.5
        if t < 1e-12:
            break
        free, val, g, H = cand, v2, g2, H2
    if np.max(np.abs(g), initial=0.0) <= max(tol, 1e-9):
        return free, val, g, H, max_iter
    raise FloatingPointError("Newton iteration for the critical point did not converge")


# ---------------------------------------------------------------------------
# Closed form
# ---------------------------------------------------------------------------


def _log_psi_closed(x: np.ndarray, lam: np.ndarray) -> complex:
    n = lam.size
    if n == 1:
        return complex(lam[0] * x[0])
    if n == 2:
        z = 2.0 * math.exp(0.5 * (x[1] - x[0]))
        return complex(math.log(2.0) + 0.5 * (lam[0] + lam[1]) * (x[0] + x[1])
                       + log_macdonald_k(lam[0] - lam[1], z))
    raise UnsupportedSize("closed form available for N <= 2")


# ---------------------------------------------------------------------------
# Givental integral
# ---------------------------------------------------------------------------


def _pair_argmax(mu, upper, lower):
    """Maximiser of ``mu a - e^{a - upper} - e^{lower - a}`` (vectorised)."""
    mu = np.asarray(mu, dtype=float)
    E = np.exp(np.minimum(lower - upper, 700.0))
    s = np.sqrt(mu * mu + 4.0 * E)
    r = np.where(mu >= 0, 0.5 * (mu + s), 2.0 * E / np.maximum(s - mu, 1e-300))
    return upper + np.log(r)


def _solve_drop(fun, center, level, direction, scale=1.0):
    """Distance ``s >= 0`` with ``fun(center + direction s) = level`` (vectorised).

    ``fun`` is concave along the ray; where ``fun(center) < level`` the
    returned distance is 0.
    """
    center = np.asarray(center, dtype=float)
    active = fun(center) >= level
    step = np.where(active, scale, 0.0)
    for _ in range(80):
        bad = active & (fun(center + direction * step) >= level)
        if not bad.any():
            break
        step = np.where(bad, 2.0 * step, step)
    lo = np.zeros_like(step)
    hi = step
    for _ in range(55):
        mid = 0.5 * (lo + hi)
        inside = fun(center + direction * mid) >= level
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return hi


def _trap(a, b, n):
    """Trapezoid nodes ``(..., n)`` and weights on ``[a, b]`` (broadcast)."""
    t = np.linspace(0.0, 1.0, n)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    nodes = a + (b - a) * t
    w = np.full(n, 1.0 / (n - 1))
    w[0] = w[-1] = 0.5 / (n - 1)
    return nodes, (b - a) * w


def _givental_n2(x, lam, n_start=129, rtol=1e-13, n_max=8193):
    mu = float((lam[0] - lam[1]).real)
    dl = lam[0] - lam[1]
    base = lam[1] * (x[0] + x[1])

    def f_re(a):
        return mu * a - np.exp(a - x[0]) - np.exp(x[1] - a)

    a_star = float(_pair_argmax(mu, x[0], x[1]))
    peak = float(f_re(a_star))
    lo = a_star - float(_solve_drop(f_re, a_star, peak - DROP, -1.0))
    hi = a_star + float(_solve_drop(f_re, a_star, peak - DROP, 1.0))
    n = n_start
    prev = None
    while True:
        a, w = _trap(lo, hi, n)
        vals = np.exp(dl * a - np.exp(a - x[0]) - np.exp(x[1] - a) - peak)
        total = np.sum(w * vals)
        coarse = np.sum(_trap(lo, hi, (n + 1) // 2)[1] * vals[::2])
        err = abs(total - coarse) / abs(total)
        if err <= rtol or n >= n_max or (prev is not None and abs(total - prev) / abs(total) <= rtol):
            break
        prev = total
        n = 2 * n - 1
    log_val = complex(np.log(total) + peak + base)
    return PsiValue(log_val, "givental", float(err), {"nodes": n, "bracket": (lo, hi)})


def _givental_n3(x, lam, n_start=41, rtol=1e-9, n_max=97):
    x = np.asarray(x, dtype=float)
    lr = lam.real
    mu1 = lr[0] - lr[1]
    mu2 = lr[1] - lr[2]
    x1, x2, x3 = x

    def F_re(a, b, c):
        return (mu1 * a + mu2 * (b + c)
                - np.exp(a - b) - np.exp(c - a) - np.exp(b - x1)
                - np.exp(x2 - b) - np.exp(c - x2) - np.exp(x3 - c))

    def F(a, b, c):
        return ((lam[0] - lam[1]) * a + (lam[1] - lam[2]) * (b + c)
                - np.exp(a - b) - np.exp(c - a) - np.exp(b - x1)
                - np.exp(x2 - b) - np.exp(c - x2) - np.exp(x3 - c))

    def P2(b, c):
        return F_re(_pair_argmax(mu1, b, c), b, c)

    def c_star(b):
        b = np.asarray(b, dtype=float)

        def dF(c):
            a = _pair_argmax(mu1, b, c)
            return mu2 - np.exp(c - a) - np.exp(c - x2) + np.exp(x3 - c)

        lo = np.full(b.shape, min(x3, x2) - 1.0)
        hi = np.full(b.shape, max(x2, x3, b.max(initial=x2)) + 1.0)
        for _ in range(100):
            m = dF(lo) <= 0
            if not m.any():
                break
            lo = np.where(m, lo - 2.0 * (hi - lo), lo)
        for _ in range(100):
            m = dF(hi) >= 0
            if not m.any():
                break
            hi = np.where(m, hi + 2.0 * (hi - lo), hi)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            pos = dF(mid) > 0
            lo = np.where(pos, mid, lo)
            hi = np.where(pos, hi, mid)
        return 0.5 * (lo + hi)

    def P1(b):
        return P2(b, c_star(b))

    free, gmax, _, H, _ = _maximise_energy(x, lr)
    a0, b0, c0 = free
    level = gmax - DROP
    b_lo = b0 - float(_solve_drop(P1, np.array(b0), level, -1.0))
    b_hi = b0 + float(_solve_drop(P1, np.array(b0), level, 1.0))

    def integrate(n):
        b, wb = _trap(b_lo, b_hi, n)
        cs = c_star(b)
        f2 = lambda c: P2(b, c)
        c_lo = cs - _solve_drop(f2, cs, level, -1.0)
        c_hi = cs + _solve_drop(f2, cs, level, 1.0)
        c, wc = _trap(c_lo, c_hi, n)  # (n_b, n_c)
        bb = np.broadcast_to(b[:, None], c.shape)
        a_s = _pair_argmax(mu1, bb, c)
        f1 = lambda a: F_re(a, bb, c)
        a_lo = a_s - _solve_drop(f1, a_s, level, -1.0)
        a_hi = a_s + _solve_drop(f1, a_s, level, 1.0)
        a, wa = _trap(a_lo, a_hi, n)  # (n_b, n_c, n_a)
        vals = np.exp(F(a, bb[..., None], c[..., None]) - gmax)
        fine = np.einsum("i,ij,ijk,ijk->", wb, wc, wa, vals)
        # the same brackets with every other node
        half = (n + 1) // 2
        wb2 = _trap(b_lo, b_hi, half)[1]
        wc2 = _trap(c_lo[::2], c_hi[::2], half)[1]
        wa2 = _trap(a_lo[::2, ::2], a_hi[::2, ::2], half)[1]
        coarse = np.einsum("i,ij,ijk,ijk->", wb2, wc2, wa2, vals[::2, ::2, ::2])
        return fine, coarse

    n = n_start
    while True:
        fine, coarse = integrate(n)
        err = abs(fine - coarse) / abs(fine)
        if err <= rtol or n >= n_max:
            break
        n = 2 * n - 1
    base = lam[2] * x.sum()
    log_val = complex(np.log(fine) + gmax + base)
    return PsiValue(log_val, "givental", float(err), {"nodes": n, "critical": free})


# ---------------------------------------------------------------------------
# Mellin-Barnes recursion
# ---------------------------------------------------------------------------


def _check_contour(lam: np.ndarray, a: float):
    if not a < lam.real.min():
        raise ContourError("contour abscissa must lie left of every Re lambda_j")


def _mb_n2(x, lam, contour: ContourSpec):
    a = contour.abscissas[0] if contour.abscissas else lam.real.min() - 1.0
    _check_contour(lam, a)
    U, P = contour.half_width, contour.points
    c0 = lam.imag.mean()
    u = np.linspace(-U, U, P)
    h = u[1] - u[0]
    d = a + 1j * (c0 + u)
    logs = (x[0] * (lam.sum() - d) + d * x[1]
            + log_gamma_complex(lam[0] - d) + log_gamma_complex(lam[1] - d))
    shift = logs.real.max()
    w = np.full(P, h)
    w[0] = w[-1] = 0.5 * h
    total = np.sum(w * np.exp(logs - shift)) / (2.0 * math.pi)
    return complex(np.log(total) + shift)


def _mb_n3(x, lam, contour: ContourSpec):
    a = contour.abscissas[0] if contour.abscissas else lam.real.min() - 1.0
    _check_contour(lam, a)
    U, P = contour.half_width, contour.points
    c_in = -1.0  # Re of the inner variable; the inner difference is imaginary
    c0 = lam.imag.mean()
    u = np.linspace(-U, U, P)
    h = u[1] - u[0]
    eta = 0.5 * h
    y = x[2] - x[1]
    # inner N=2 integral f(i w; y) on the lattice w = k h, |k| < P
    k = np.arange(-(P - 1), P)
    m_in = int(math.ceil((U + 40.0) / eta))
    m = np.arange(-m_in, m_in + 1)
    s = np.arange(-(m_in + P), m_in + P + 1)
    G = log_gamma_complex(-c_in - 1j * s * eta)  # log Gamma(-c - i s eta)
    off = m_in + P
    idx_minus = (m[None, :] - k[:, None]) + off
    idx_plus = (m[None, :] + k[:, None]) + off
    eps = c_in + 1j * m * eta
    logs_in = G[idx_minus] + G[idx_plus] + (eps * y)[None, :]
    sh_in = logs_in.real.max(axis=1, keepdims=True)
    win = np.full(m.size, eta)
    win[0] = win[-1] = 0.5 * eta
    f = (np.exp(logs_in - sh_in) @ win) * np.exp(sh_in[:, 0]) / (2.0 * math.pi)
    wlat = k * h
    R = wlat * np.sinh(math.pi * wlat) / math.pi  # 1 / (Gamma(iw) Gamma(-iw))
    Fk = f * R
    # outer: A(u) = exp(-x1 g + g (x2 + x3)/2) prod_i Gamma(lambda_i - g)
    g = a + 1j * (c0 + u)
    logA = (-x[0] * g + 0.5 * g * (x[1] + x[2])
            + sum(log_gamma_complex(lam[i] - g) for i in range(3)))
    shA = logA.real.max()
    A = np.exp(logA - shA)
    wo = np.full(P, h)
    wo[0] = wo[-1] = 0.5 * h
    Aw = A * wo
    T = Fk[(np.arange(P)[:, None] - np.arange(P)[None, :]) + (P - 1)]
    total = Aw @ T @ Aw
    log_val = np.log(total) + 2.0 * shA + x[0] * lam.sum() - math.log(2.0 * (2.0 * math.pi) ** 2)
    return complex(log_val)


def _mellin_barnes(x, lam, contour: ContourSpec | None):
    n = lam.size
    if contour is None:
        contour = ContourSpec((lam.real.min() - 1.0,))
    fn = {1: None, 2: _mb_n2, 3: _mb_n3}.get(n)
    if n == 1:
        return PsiValue(complex(lam[0] * x[0]), "mellin-barnes", 0.0)
    if fn is None:
        raise UnsupportedSize("mellin-barnes available for N <= 3")
    v1 = fn(x, lam, contour)
    v2 = fn(x, lam, contour.doubled())
    err = abs(np.expm1(v2 - v1))
    return PsiValue(v1, "mellin-barnes", float(err), {"contour": contour})


# ---------------------------------------------------------------------------
# Public interface
# ---------------------------------------------------------------------------


def _prepare(x, lam):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lam = SpectralParam.coerce(lam).values
    if x.shape != lam.shape:
        raise ValueError("x and lambda must have the same length")
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    return x, lam


def log_whittaker_psi(x, lam, method: str = "auto", contour: ContourSpec | None = None) -> PsiValue:
    """``log psi_lambda(x)`` with method information and an error estimate.

    Parameters
    ----------
    x : array_like
        Bottom row, length ``N``.
    lam : SpectralParam or array_like
        Complex spectral parameter.
    method : {'closed-form', 'givental', 'mellin-barnes', 'auto'}
        ``auto`` picks the closed form for N <= 2 and the Givental integral
        for N = 3.
    contour : ContourSpec, optional
        Vertical line and truncation for the Mellin-Barnes integrals.
    """
    x, lam = _prepare(x, lam)
    n = lam.size
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if n > 3:
        raise UnsupportedSize("Whittaker functions are implemented for N <= 3")
    if method == "auto":
        method = "closed-form" if n <= 2 else "givental"
    if method == "closed-form":
        return PsiValue(_log_psi_closed(x, lam), "closed-form", 1e-13)
    if method == "givental":
        if n == 1:
            return PsiValue(complex(lam[0] * x[0]), "givental", 0.0)
        return _givental_n2(x, lam) if n == 2 else _givental_n3(x, lam)
    return _mellin_barnes(x, lam, contour)


def whittaker_psi(x, lam, method: str = "auto", contour: ContourSpec | None = None) -> complex:
    """``psi_lambda(x)``; see :func:`log_whittaker_psi`."""
    return log_whittaker_psi(x, lam, method, contour).value
