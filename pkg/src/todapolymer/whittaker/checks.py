"""Zero-temperature limits, asymptotics, volumes and intertwining identities."""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm

from ..core_paths import RngStream
from .psi import UnsupportedSize, _maximise_energy, log_whittaker_psi


def vandermonde_h(x) -> float:
    """``h(x) = prod_{i<j} (x_i - x_j)``."""
    x = np.asarray(x)
    n = x.size
    out = 1.0
    for i in range(n):
        for j in range(i + 1, n):
            out *= x[i] - x[j]
    return out


def superfactorial(n: int) -> int:
    """``prod_{k<n} k!``."""
    return math.prod(math.factorial(k) for k in range(1, n))


# ---------------------------------------------------------------------------
# Duistermaat-Heckman measure
# ---------------------------------------------------------------------------


def dh_alternating_ratio(x, lam) -> float:
    """``sum_sigma sgn(sigma) e^{(sigma lambda, x)} / h(lambda)``, continuous in ``lambda``.

    Writes the determinant ``det[e^{lambda_j x_i}]`` over the Vandermonde of
    ``lambda`` as a determinant of divided differences
    ``e^{. x_i}[lambda_1, ..., lambda_j]``, read off the first row of
    ``expm(x_i B)`` with ``B`` upper bidiagonal (diagonal ``lambda``, unit
    superdiagonal).  Coinciding ``lambda`` need no special treatment.
    """
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    n = x.size
    if lam.size != n:
        raise ValueError("x and lambda must have equal length")
    B = np.diag(lam) + np.diag(np.ones(n - 1), 1)
    D = np.array([expm(xi * B)[0] for xi in x])
    sign = -1.0 if (n * (n - 1) // 2) % 2 else 1.0
    return float(sign * np.linalg.det(D))


def dh_mgf(x, lam) -> float:
    """Moment generating function of the Duistermaat-Heckman measure with top ``x``.

    ``(prod_{k<N} k!) sum_sigma sgn(sigma) e^{(sigma lambda, x)} / (h(x) h(lambda))``.
    """
    x = np.asarray(x, dtype=float)
    hx = vandermonde_h(x)
    if hx == 0:
        raise ValueError("x must have distinct entries")
    return superfactorial(x.size) * dh_alternating_ratio(x, lam) / hx


def gt_volume(x) -> float:
    """Volume ``h(x) / prod_{k<N} k!`` of the Gelfand-Tsetlin polytope with bottom row ``x``."""
    x = np.sort(np.asarray(x, dtype=float))[::-1]
    return vandermonde_h(x) / superfactorial(x.size)


def gt_volume_mc(x, rng: RngStream | int, samples: int = 1_000_000, chunk: int = 200_000) -> dict:
    """Hit-or-miss estimate of the Gelfand-Tsetlin volume.

    Samples the box where entry ``(k, i)`` ranges over ``[x_{N-k+i}, x_i]``
    (the range forced by interlacing) and counts interlacing arrays.
    """
    rng = rng if isinstance(rng, RngStream) else RngStream(int(rng))
    x = np.sort(np.asarray(x, dtype=float))[::-1]
    n = x.size
    lows, highs, labels = [], [], []
    for k in range(1, n):
        for i in range(1, k + 1):
            lows.append(x[n - k + i - 1])
            highs.append(x[i - 1])
            labels.append((k, i))
    lows = np.array(lows)
    highs = np.array(highs)
    box = float(np.prod(highs - lows))
    pos = {lab: j for j, lab in enumerate(labels)}
    hits = 0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        u = rng.uniform((m, lows.size))
        T = lows + (highs - lows) * u
        ok = np.ones(m, dtype=bool)
        for k in range(1, n):
            upper = (lambda i: T[:, pos[(k + 1, i)]]) if k + 1 < n else (lambda i: x[i - 1])
            for i in range(1, k + 1):
                v = T[:, pos[(k, i)]]
                ok &= (upper(i) >= v) & (v >= upper(i + 1))
        hits += int(ok.sum())
        done += m
    p = hits / samples
    est = box * p
    se = box * math.sqrt(max(p * (1 - p), 1e-300) / samples)
    exact = gt_volume(x)
    return {"estimate": est, "se": se, "exact": exact,
            "relative_error": abs(est - exact) / exact if exact else float("nan")}


# ---------------------------------------------------------------------------
# Asymptotics
# ---------------------------------------------------------------------------


def asymptotic_checks(x, lam, betas=(2, 4, 8, 16, 24, 32, 40, 64), method: str = "auto") -> dict:
    """Compare scaled Whittaker functions with their zero-temperature limits.

    ``beta^{-N(N-1)/2} psi_0(beta x) -> h(x) / prod k!`` and
    ``beta^{-N(N-1)/2} psi_{lambda/beta}(beta x) ->
    sum_sigma sgn(sigma) e^{(sigma lambda, x)} / h(lambda)``.
    """
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    n = x.size
    d = n * (n - 1) // 2
    t0 = vandermonde_h(x) / superfactorial(n)
    t1 = dh_alternating_ratio(x, lam)
    rows = []
    for b in betas:
        l0 = log_whittaker_psi(b * x, np.zeros(n, dtype=complex), method).log_value.real
        l1 = log_whittaker_psi(b * x, (lam / b).astype(complex), method).log_value.real
        rows.append({
            "beta": float(b),
            "ratio0": math.exp(l0 - d * math.log(b)) / t0,
            "ratio1": math.exp(l1 - d * math.log(b)) / t1,
        })
    r0 = np.array([r["ratio0"] for r in rows])
    r1 = np.array([r["ratio1"] for r in rows])
    return {
        "target0": t0,
        "target1": t1,
        "rows": rows,
        "monotone0": bool(np.all(np.diff(np.abs(r0 - 1)) <= 0)),
        "monotone1": bool(np.all(np.diff(np.abs(r1 - 1)) <= 0)),
    }


def rho(n: int) -> np.ndarray:
    """Half the sum of the positive roots: ``rho_i = (n + 1)/2 - i``."""
    return (n + 1) / 2.0 - np.arange(1, n + 1)


def laplace_profile(nu, ladder=(2, 4, 6, 8, 10)) -> dict:
    """``log psi_nu(-M rho)`` along a ladder of ``M`` (N=2, Givental quadrature).

    Reports the difference to ``log psi_0(-M rho)`` (tends to 0) and the
    remainder of ``log psi_0`` after ``-M/4 + e^{M/2} F_0(T^0)``, with
    ``F_0(T^0) = -2`` the critical value at bottom row ``0``.
    """
    nu = np.asarray(nu, dtype=float)
    if nu.size != 2:
        raise UnsupportedSize("laplace_profile is implemented for N = 2")
    r = rho(2)
    _, f0, *_ = _maximise_energy(np.zeros(2), np.zeros(2))
    rows = []
    for M in ladder:
        x = -M * r
        lv = log_whittaker_psi(x, nu.astype(complex), "givental").log_value.real
        l0 = log_whittaker_psi(x, np.zeros(2, dtype=complex), "givental").log_value.real
        rows.append({
            "M": float(M),
            "log_psi_nu": lv,
            "difference": lv - l0,
            "remainder": l0 - (-M / 4.0 + math.exp(M / 2.0) * f0),
        })
    return {"critical_value": f0, "rows": rows}


# ---------------------------------------------------------------------------
# Intertwining identities
# ---------------------------------------------------------------------------


def kernel_q(x, y, theta) -> complex:
    """``Q_theta(x, y) = exp(theta(sum x - sum y) - sum_i (e^{y_i - x_i} + e^{x_{i+1} - y_i}))``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    pot = np.sum(np.exp(y - x[:-1]) + np.exp(x[1:] - y))
    return np.exp(theta * (x.sum() - y.sum()) - pot)


def toda_potential(x) -> float:
    """``2 sum_i e^{x_{i+1} - x_i}``; the Hamiltonian is ``Laplacian - potential``."""
    x = np.asarray(x, dtype=float)
    return 2.0 * float(np.sum(np.exp(x[1:] - x[:-1])))


def _laplacian_fd(f, z, h):
    z = np.asarray(z, dtype=float)
    f0 = f(z)
    total = 0.0
    for i in range(z.size):
        e = np.zeros(z.size)
        e[i] = h
        total = total + f(z + e) - 2.0 * f0 + f(z - e)
    return total / (h * h), f0


def verify_kernel_intertwining(x, y, theta, h: float = 1e-4) -> dict:
    """Residual of ``(H_x - theta^2) Q(x, y) = H_y Q(x, y)`` by central differences.

    The residual is scaled by the sum of the absolute values of the terms.
    For N=2, ``H^{(1)} = d^2/dy^2``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.size != x.size - 1 or x.size < 2:
        raise ValueError("need x in R^N and y in R^{N-1}, N >= 2")
    lap_x, q = _laplacian_fd(lambda z: kernel_q(z, y, theta), x, h)
    lap_y, _ = _laplacian_fd(lambda z: kernel_q(x, z, theta), y, h)
    vx = toda_potential(x) * q
    vy = toda_potential(y) * q
    lhs = lap_x - vx - theta * theta * q
    rhs = lap_y - vy
    scale = abs(lap_x) + abs(vx) + abs(theta * theta * q) + abs(lap_y) + abs(vy)
    return {"lhs": complex(lhs), "rhs": complex(rhs), "residual": float(abs(lhs - rhs) / scale)}


def verify_operator_intertwinings(theta: float = 0.0, x=(0.3, -0.2), center=(0.2, -0.1, 0.4),
                                  width: float = 0.8, h: float = 1e-3) -> dict:
    """Residuals of ``(H - theta^2) R_theta f = R_theta U_theta f = R_theta V_theta f`` at N=2.

    ``R_theta f(x) = int Q_theta(x, y) f(x, y) dy``; the left side applies
    central differences to the ``y``-quadrature, the right sides apply the
    operators to the Gaussian bump ``f`` analytically.  Three right sides
    are reported: ``U`` with drift ``2(theta + e^{y - x_1})`` on ``x_1``,
    the same without ``theta`` on ``x_1`` (``U_printed``), and ``V``.
    """
    x = np.asarray(x, dtype=float)
    c = np.asarray(center, dtype=float)
    s2 = width ** 2
    y = np.linspace(min(x[1], c[2]) - 25.0, max(x[0], c[2]) + 25.0, 40001)
    wy = np.full(y.size, y[1] - y[0])
    wy[0] = wy[-1] = 0.5 * wy[0]

    def Q(x1, x2):
        return np.exp(theta * (x1 + x2 - y) - np.exp(y - x1) - np.exp(x2 - y))

    def f(x1, x2):
        return np.exp(-((x1 - c[0]) ** 2 + (x2 - c[1]) ** 2 + (y - c[2]) ** 2) / (2 * s2))

    def Rf(z):
        return float(np.sum(wy * Q(z[0], z[1]) * f(z[0], z[1])))

    lap, r0 = _laplacian_fd(Rf, x, h)
    lhs = lap - toda_potential(x) * r0 - theta * theta * r0

    x1, x2 = x
    q = Q(x1, x2)
    fv = f(x1, x2)
    dx1 = -(x1 - c[0]) / s2 * fv
    dx2 = -(x2 - c[1]) / s2 * fv
    dy = -(y - c[2]) / s2 * fv
    d2x1 = ((x1 - c[0]) ** 2 / s2 ** 2 - 1 / s2) * fv
    d2x2 = ((x2 - c[1]) ** 2 / s2 ** 2 - 1 / s2) * fv
    d2y = ((y - c[2]) ** 2 / s2 ** 2 - 1 / s2) * fv
    dydx1 = (y - c[2]) * (x1 - c[0]) / s2 ** 2 * fv
    base = d2y + d2x1 + d2x2 + 2.0 * (theta - np.exp(x2 - y)) * dx2
    Uf = base + 2.0 * (theta + np.exp(y - x1)) * dx1
    Uf_printed = base + 2.0 * np.exp(y - x1) * dx1
    Vf = base + 2.0 * (dydx1 + np.exp(x2 - y) * dx1)
    out = {"lhs": lhs}
    for name, g in (("U", Uf), ("U_printed", Uf_printed), ("V", Vf)):
        rhs = float(np.sum(wy * q * g))
        out[name] = rhs
        out[name + "_residual"] = abs(lhs - rhs) / abs(lhs)
    return out
