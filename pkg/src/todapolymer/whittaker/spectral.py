"""Spectral integrals: Sklyanin density, theta_t, entrance laws, moments.

Integrals over ``i R^N`` are written in the imaginary parts ``u``, so every
density returned here is a density in ``du``.
"""

from __future__ import annotations

import math

import numpy as np

from .psi import ContourError, ContourSpec, SpectralParam, UnsupportedSize, log_whittaker_psi
from .special import (
    _panel_nodes,
    log_gamma_complex,
    log_macdonald_k,
    macdonald_k,
    macdonald_k_imag_orders,
    modified_bessel_i,
)

__all__ = [
    "sklyanin_density",
    "theta_density",
    "theta_profile_n2",
    "entrance_density",
    "entrance_mass",
    "entrance_first_coordinate_cdf",
    "moment_transform",
    "bump_stade_check",
    "gig_density",
    "hartman_watson_theta",
    "hartman_watson_laplace",
]


def _trap_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


# ---------------------------------------------------------------------------
# Sklyanin measure
# ---------------------------------------------------------------------------


def sklyanin_density(lam) -> float:
    """``s_N`` as a density in ``u`` where ``lambda = i u``.

    ``(2 pi)^{-N} (N!)^{-1} prod_{j != k} Gamma(lambda_j - lambda_k)^{-1}``;
    zero when two parameters coincide.
    """
    lam = SpectralParam.coerce(lam)
    if not lam.is_imaginary(1e-14):
        raise ValueError("Sklyanin density is defined on purely imaginary parameters")
    v = lam.values
    n = v.size
    diffs = [v[j] - v[k] for j in range(n) for k in range(n) if j != k]
    if any(abs(d) == 0 for d in diffs):
        return 0.0
    logs = -np.sum(log_gamma_complex(np.array(diffs))) if diffs else 0.0
    val = np.exp(logs) / ((2.0 * math.pi) ** n * math.factorial(n))
    return float(np.real(val))


# ---------------------------------------------------------------------------
# theta_t and the entrance law
# ---------------------------------------------------------------------------


def _center_integral(S, t: float):
    """``int exp(-i sigma S - sigma^2 t) d sigma`` by the trapezoid rule."""
    sig_max = math.sqrt(46.0 / t)
    n = 801
    sig = np.linspace(-sig_max, sig_max, n)
    w = _trap_weights(n, sig[1] - sig[0])
    S = np.atleast_1d(np.asarray(S, dtype=float))
    vals = np.exp(-1j * np.outer(S, sig) - sig * sig * t) @ w
    return vals


def _w_grid(t: float):
    # the w-integrand decays like exp(pi w / 2 - w^2 t / 4)
    wmax = (math.pi / 2 + math.sqrt(math.pi ** 2 / 4 + 42.0 * t)) / (t / 2)
    n = int(max(400, math.ceil(wmax / 0.04))) + 1
    w = np.linspace(0.0, wmax, n)
    return w, _trap_weights(n, w[1] - w[0])


def theta_profile_n2(d, t: float) -> np.ndarray:
    """``int 2 K_{iw}(2e^{-d/2}) e^{-w^2 t/4} w sinh(pi w)/(8 pi^3) dw`` over R."""
    d = np.atleast_1d(np.asarray(d, dtype=float))
    w, wt = _w_grid(t)
    weight = 2.0 * wt * np.exp(-w * w * t / 4.0) * w * np.sinh(math.pi * w) / (8.0 * math.pi ** 3)
    out = np.empty(d.shape)
    for i, di in enumerate(d):
        z = 2.0 * math.exp(-0.5 * di)
        out[i] = 2.0 * (macdonald_k_imag_orders(w, z) @ weight)  # even integrand over R
    return out


def theta_density(x, t: float, check: bool = True) -> float:
    """``theta_t(x) = int psi_{-lambda}(x) e^{sum lambda_i^2 t/2} s_N(lambda) d lambda``.

    For N=2 the integral over ``(u_1, u_2)`` is taken in the coordinates
    ``sigma = (u_1 + u_2)/2`` and ``w = u_1 - u_2``, where the integrand is a
    product.  The imaginary residue is checked against 1e-9 of the value.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size
    if n == 1:
        umax = math.sqrt(2.0 * 46.0 / t)
        u = np.linspace(-umax, umax, 1601)
        w = _trap_weights(u.size, u[1] - u[0])
        val = np.sum(w * np.exp(-1j * u * x[0] - u * u * t / 2.0)) / (2.0 * math.pi)
    elif n == 2:
        S = x[0] + x[1]
        val = _center_integral(S, t)[0] * theta_profile_n2(x[0] - x[1], t)[0]
    else:
        raise UnsupportedSize("theta_density implemented for N <= 2")
    if check and abs(val.imag) > 1e-9 * max(abs(val), 1e-300):
        raise FloatingPointError("theta_density: imaginary residue too large")
    if check and val.real < -1e-10:  # quadrature noise is about 1e-12
        raise FloatingPointError("theta_density: negative value")
    return float(val.real)


def entrance_density(x, t: float, nu=None) -> float:
    """Density of the entrance law ``e^{-|nu|^2 t/2} psi_nu(x) theta_t(x)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    nu = np.zeros(x.size) if nu is None else np.atleast_1d(np.asarray(nu, dtype=float))
    lp = log_whittaker_psi(x, nu.astype(complex), "closed-form").log_value.real
    return float(math.exp(-0.5 * np.dot(nu, nu) * t + lp) * theta_density(x, t))


def _entrance_n2_d_law(t: float, d_lo: float = -12.0, d_hi: float = 24.0, n: int = 721):
    """Grid and unnormalised density of ``d = x_1 - x_2`` under the N=2, nu=0 law."""
    d = np.linspace(d_lo, d_hi, n)
    prof = theta_profile_n2(d, t)
    psi0 = 2.0 * np.exp(log_macdonald_k(0.0, 2.0 * np.exp(-0.5 * d)))
    return d, psi0 * prof


def entrance_mass(t: float = 1.0) -> float:
    """``int psi_0 theta_t dx`` for N=2 by quadrature in ``(S, d)`` (should be 1)."""
    d, q = _entrance_n2_d_law(t)
    wd = _trap_weights(d.size, d[1] - d[0])
    smax = math.sqrt(4.0 * 46.0 * t)
    S = np.linspace(-smax, smax, 801)
    ws = _trap_weights(S.size, S[1] - S[0])
    cs = _center_integral(S, t).real
    # dx_1 dx_2 = dS dd / 2
    return float(0.5 * np.sum(ws * cs) * np.sum(wd * q))


def entrance_first_coordinate_cdf(a, t: float = 1.0):
    """CDF of ``x_1`` under the N=2, ``nu = 0`` entrance law at time ``t``.

    The density factorises in ``S = x_1 + x_2`` (Gaussian, variance ``2t``)
    and ``d = x_1 - x_2``; ``x_1 = (S + d)/2``.
    """
    from scipy.special import ndtr

    a = np.atleast_1d(np.asarray(a, dtype=float))
    d, q = _entrance_n2_d_law(t)
    wd = _trap_weights(d.size, d[1] - d[0])
    q = q / np.sum(wd * q)
    return (ndtr((2.0 * a[:, None] - d[None, :]) / math.sqrt(2.0 * t)) * (wd * q)[None, :]).sum(axis=1)


# ---------------------------------------------------------------------------
# Moment formula
# ---------------------------------------------------------------------------


def moment_transform(s: float, t: float, n: int = 1, contour: ContourSpec | None = None) -> float:
    """``E exp(-s Z^n_t)`` as a contour integral over ``Re lambda_i = a_i < 0``.

    ``int s^{sum lambda} prod Gamma(-lambda_i)^n e^{sum lambda_i^2 t/2}
    s_n(lambda) d lambda``.
    """
    if n not in (1, 2):
        raise UnsupportedSize("moment_transform supports n <= 2")
    if not (s > 0 and t > 0):
        raise ValueError("s and t must be positive")
    if contour is None:
        U = max(12.0, math.sqrt(2.0 * 50.0 / t))
        contour = ContourSpec((-0.5,) * n, U, 481)
    ab = contour.abscissas or (-0.5,)
    if len(ab) == 1:
        ab = ab * n
    if any(a >= 0 for a in ab):
        raise ContourError("moment contour needs Re lambda_i < 0")
    u = np.linspace(-contour.half_width, contour.half_width, contour.points)
    w = _trap_weights(u.size, u[1] - u[0])
    ls = math.log(s)
    if n == 1:
        lam = ab[0] + 1j * u
        logs = lam * ls + log_gamma_complex(-lam) + lam * lam * t / 2.0
        val = np.sum(w * np.exp(logs)) / (2.0 * math.pi)
    else:
        l1 = ab[0] + 1j * u
        l2 = ab[1] + 1j * u
        g1 = l1 * ls + 2.0 * log_gamma_complex(-l1) + l1 * l1 * t / 2.0
        g2 = l2 * ls + 2.0 * log_gamma_complex(-l2) + l2 * l2 * t / 2.0
        diff = l1[:, None] - l2[None, :]
        # 1 / (Gamma(z) Gamma(-z)) = -z sin(pi z) / pi, entire in z
        recip = -diff * np.sin(math.pi * diff) / math.pi
        mat = np.exp(g1[:, None] + g2[None, :]) * recip
        val = (w @ mat @ w) / (2.0 * (2.0 * math.pi) ** 2)
    return float(val.real)


# ---------------------------------------------------------------------------
# Bump-Stade identity
# ---------------------------------------------------------------------------


def bump_stade_check(lam, nu, z: float = 0.0, n: int | None = None) -> dict:
    """Relative residual of ``int e^{-e^{x_1 - z}} psi_lambda psi_nu dx``
    against ``e^{z sum(lambda + nu)} prod_{i,j} Gamma(lambda_i + nu_j)``.

    The box integral is evaluated with a tensor trapezoid rule; for N=2 in
    the coordinates ``(x_1, d = x_1 - x_2)`` the rule factorises.
    """
    lam = SpectralParam.coerce(lam).values
    nu = SpectralParam.coerce(nu).values
    n = lam.size if n is None else n
    if lam.size != n or nu.size != n or n > 2:
        raise UnsupportedSize("bump_stade_check supports N <= 2")
    if np.any((lam[:, None] + nu[None, :]).real <= 0):
        raise ValueError("need Re(lambda_i + nu_j) > 0")
    c = complex(np.sum(lam) + np.sum(nu))
    # x_1 factor: int exp(-e^{x - z} + c x) dx, trapezoid on [z - 46/Re c, z + 5]
    xs = np.linspace(z - 50.0 / c.real, z + 5.0, 20001)
    wx = _trap_weights(xs.size, xs[1] - xs[0])
    if n == 1:
        num = np.sum(wx * np.exp(-np.exp(xs - z) + c * xs))
    else:
        fx = np.sum(wx * np.exp(-np.exp(xs - z) + c * xs))
        a1 = lam[0] - lam[1]
        a2 = nu[0] - nu[1]
        rate = 0.5 * (c.real - abs(a1.real) - abs(a2.real))
        d = np.linspace(-12.0, 12.0 + 46.0 / rate, 6001)
        wd = _trap_weights(d.size, d[1] - d[0])
        zz = 2.0 * np.exp(-0.5 * d)
        k1 = _log_k_any(a1, zz)
        k2 = _log_k_any(a2, zz)
        fd = np.sum(wd * 4.0 * np.exp(-0.5 * c * d + k1 + k2))
        num = fx * fd
    target_log = z * c + np.sum(log_gamma_complex((lam[:, None] + nu[None, :]).ravel()))
    target = np.exp(target_log)
    return {
        "integral": complex(num),
        "target": complex(target),
        "residual": float(abs(num - target) / abs(target)),
    }


def _log_k_any(order: complex, z: np.ndarray) -> np.ndarray:
    if order.imag == 0:
        return log_macdonald_k(order.real, z)
    return log_macdonald_k(order, z)


# ---------------------------------------------------------------------------
# Generalised inverse Gaussian and Hartman-Watson
# ---------------------------------------------------------------------------


def gig_density(mu: float, z: float, u):
    """Cosh-form GIG density ``e^{mu u - cosh(u)/z} / (2 K_mu(1/z))``."""
    if not z > 0:
        raise ValueError("z must be positive")
    u = np.asarray(u, dtype=float)
    lk = log_macdonald_k(mu, 1.0 / z)
    return np.exp(mu * u - np.cosh(u) / z - math.log(2.0) - lk)


def hartman_watson_theta(r: float, t, y_max: float = 40.0, y_points: int = 2001) -> np.ndarray:
    """``theta_r(t) = pi^{-2} int_0^inf y sinh(pi y) e^{-y^2 t/2} K_{iy}(r) dy``.

    Reliable for ``t >= 0.3``; below that the cancellation between the
    growing ``sinh`` and the oscillating ``K_{iy}`` loses all digits.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    y = np.linspace(0.0, y_max, y_points)
    wy = _trap_weights(y.size, y[1] - y[0])
    ky = macdonald_k_imag_orders(y, r)
    base = wy * y * np.sinh(math.pi * y) * ky / math.pi ** 2
    return np.exp(-0.5 * np.outer(t, y * y)) @ base


def hartman_watson_laplace(r: float, nu: float, t_lo: float = 0.3, t_hi: float = 40.0,
                           panels: int = 200) -> dict:
    """``int_{t_lo}^{t_hi} e^{-nu^2 t/2} theta_r(t) dt`` against ``I_nu(r)``.

    Also reports the tail beyond ``t_hi`` from ``theta_r(t) ~
    K_0(r) t^{-3/2} / sqrt(2 pi)`` (valid for ``nu = 0``) and the value of
    the truncated integral plus that tail.
    """
    edges = np.geomspace(t_lo, t_hi, panels + 1)
    tn, tw = _panel_nodes(edges)
    th = hartman_watson_theta(r, tn)
    val = float(np.sum(tw * np.exp(-0.5 * nu * nu * tn) * th))
    target = modified_bessel_i(nu, r)
    out = {
        "r": r,
        "nu": nu,
        "integral": val,
        "target": target,
        "abs_error": abs(val - target),
        "min_theta": float(th.min()),
    }
    if nu == 0:
        k0 = float(macdonald_k(0.0, r))
        tail = 2.0 * k0 / math.sqrt(2.0 * math.pi * t_hi)
        out["tail_estimate"] = tail
        out["abs_error_tail_corrected"] = abs(val + tail - target)
    return out
