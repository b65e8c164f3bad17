"""Kolmogorov-Smirnov tests with asymptotic thresholds and moment intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class KsResult:
    statistic: float
    threshold: float
    passed: bool
    n: int
    m: int | None = None

    def as_dict(self) -> dict:
        return {"statistic": self.statistic, "threshold": self.threshold, "passed": self.passed}


def ks_critical_value(alpha: float) -> float:
    """``c(alpha) = sqrt(-ln(alpha / 2) / 2)``; about 1.6276 at alpha = 0.01."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    return math.sqrt(-math.log(alpha / 2.0) / 2.0)


MIN_KS_SAMPLES = 2000  # below this the asymptotic threshold is not trusted


def _clean(a, name, min_n=0):
    a = np.asarray(a, dtype=float).ravel()
    if a.size == 0:
        raise ValueError(f"{name} is empty")
    if a.size < min_n:
        raise ValueError(f"{name} has {a.size} samples; the asymptotic KS rule needs >= {min_n}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite values")
    return a


def ks_two_sample(a, b, alpha: float = 0.01, min_n: int = MIN_KS_SAMPLES) -> KsResult:
    """Two-sample KS: ``D = sup |F_a - F_b|`` against ``c(alpha) sqrt((n+m)/(n m))``."""
    a = _clean(a, "a", min_n)
    b = _clean(b, "b", min_n)
    d = float(stats.ks_2samp(a, b, method="asymp").statistic)
    n, m = a.size, b.size
    thr = ks_critical_value(alpha) * math.sqrt((n + m) / (n * m))
    return KsResult(d, thr, d <= thr, n, m)


def ks_one_sample(a, cdf: Callable, alpha: float = 0.01, min_n: int = MIN_KS_SAMPLES) -> KsResult:
    """One-sample KS against a vectorised ``cdf``; threshold ``c(alpha)/sqrt(n)``."""
    a = np.sort(_clean(a, "a", min_n))
    n = a.size
    f = np.asarray(cdf(a), dtype=float)
    if f.shape != a.shape:
        raise ValueError("cdf must return one value per sample point")
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
    thr = ks_critical_value(alpha) / math.sqrt(n)
    return KsResult(d, thr, d <= thr, n)


def permutation_rejection_rate(n: int, rng: np.random.Generator, trials: int = 2000,
                               alpha: float = 0.01) -> float:
    """Fraction of null two-sample draws of size ``n`` rejected by :func:`ks_two_sample`."""
    rej = 0
    for _ in range(trials):
        pool = rng.standard_normal(2 * n)
        perm = rng.permutation(pool)
        rej += not ks_two_sample(perm[:n], perm[n:], alpha, min_n=0).passed
    return rej / trials


def mean_interval(x, z: float = 3.0) -> tuple:
    """``(mean, half_width)`` of a ``z``-standard-error interval."""
    x = _clean(x, "x")
    return float(x.mean()), float(z * x.std(ddof=1) / math.sqrt(x.size))
