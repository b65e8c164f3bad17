"""GUE spectra through the tridiagonal beta = 2 model.

Normalization follows Hermitian Brownian motion at time 1: diagonal entries
are Normal(0, 1) and off-diagonal entries are complex with ``E|M_ij|^2 = 1``.
The matching tridiagonal model has diagonal Normal(0, 1) and off-diagonal
``chi_{2(n-k)} / sqrt(2)`` in position ``(k, k+1)``, so ``E tr M^2 = n^2``.
"""

from __future__ import annotations

import math

import numpy as np

from .core_paths import RngStream


def _sturm_count(diag, off2, x):
    """Number of eigenvalues strictly below ``x`` (broadcast over leading axes).

    ``diag`` has shape ``(..., n)``, ``off2`` the squared off-diagonal
    ``(..., n-1)`` and ``x`` shape ``(..., q)``; returns ``(..., q)`` counts.
    """
    tiny = 1e-300
    d = diag[..., :1] - x
    d = np.where(d == 0.0, -tiny, d)
    count = (d < 0).astype(int)
    for i in range(1, diag.shape[-1]):
        d = diag[..., i: i + 1] - x - off2[..., i - 1: i] / d
        d = np.where(d == 0.0, -tiny, d)
        count += d < 0
    return count


def eig_sym_tridiag(diag, offdiag, tol: float = 1e-13) -> np.ndarray:
    """All eigenvalues of symmetric tridiagonal matrices, sorted descending.

    Bisection on Sturm sequence counts, vectorised over any leading batch
    axes of ``diag`` (``(..., n)``) and ``offdiag`` (``(..., n-1)``).  Each
    eigenvalue is bracketed by the Gershgorin interval and halved until the
    bracket is below ``tol`` times its scale.
    """
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(offdiag, dtype=float)
    if diag.ndim == 0 or off.shape != diag.shape[:-1] + (diag.shape[-1] - 1,):
        raise ValueError("offdiag must have one fewer entry than diag")
    if not (np.all(np.isfinite(diag)) and np.all(np.isfinite(off))):
        raise ValueError("matrix entries must be finite")
    n = diag.shape[-1]
    a = np.abs(off)
    rad = np.zeros_like(diag)
    rad[..., :-1] += a
    rad[..., 1:] += a
    lo_b = np.min(diag - rad, axis=-1, keepdims=True)
    hi_b = np.max(diag + rad, axis=-1, keepdims=True)
    scale = np.maximum(np.maximum(np.abs(lo_b), np.abs(hi_b)), 1.0)
    lo_b = lo_b - 1e-12 * scale
    hi_b = hi_b + 1e-12 * scale
    off2 = off * off
    # the j-th smallest eigenvalue is the smallest x with count(x) > j
    target = np.arange(n)
    lo = np.broadcast_to(lo_b, diag.shape).copy()
    hi = np.broadcast_to(hi_b, diag.shape).copy()
    iters = int(math.ceil(math.log2(float(np.max(hi_b - lo_b)) / (tol * float(np.min(scale)))))) + 2
    for _ in range(max(iters, 1)):
        mid = 0.5 * (lo + hi)
        c = _sturm_count(diag, off2, mid)
        above = c > target
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return 0.5 * (lo + hi)[..., ::-1]


def _rng(rng) -> RngStream:
    return rng if isinstance(rng, RngStream) else RngStream(int(rng))


def tridiagonal_gue(n: int, rng, reps: int | None = None):
    """Diagonal and off-diagonal of the beta = 2 tridiagonal model."""
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    rng = _rng(rng)
    shape = () if reps is None else (reps,)
    diag = rng.normal(shape + (n,))
    df = 2.0 * np.arange(n - 1, 0, -1)
    if n > 1:
        off = np.sqrt(rng.chisq(np.broadcast_to(df, shape + (n - 1,)), shape + (n - 1,)) / 2.0)
    else:
        off = np.zeros(shape + (0,))
    return diag, off


def sample_gue_spectrum(n: int, rng, reps: int | None = None) -> np.ndarray:
    """Eigenvalues (descending) of a GUE matrix with unit entry variances.

    Returns shape ``(n,)``, or ``(reps, n)`` when ``reps`` is given.
    """
    diag, off = tridiagonal_gue(n, rng, reps)
    return eig_sym_tridiag(diag, off)


def largest_eigenvalue_samples(n: int, reps: int, rng) -> np.ndarray:
    """``reps`` independent draws of the largest GUE eigenvalue."""
    if reps < 1:
        raise ValueError("reps must be positive")
    return sample_gue_spectrum(n, rng, reps)[:, 0]


def dense_gue_spectrum(n: int, rng: np.random.Generator, reps: int) -> np.ndarray:
    """Oracle: eigenvalues of dense Hermitian matrices with the same normalization."""
    g = rng.standard_normal((reps, n, n)) + 1j * rng.standard_normal((reps, n, n))
    h = (g + np.conj(np.swapaxes(g, -1, -2))) / 2.0
    return np.linalg.eigvalsh(h)[..., ::-1]
