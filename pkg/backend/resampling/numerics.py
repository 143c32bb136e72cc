"""resampling/numerics.py — Standard normal CDF / quantile and the KS distance.

Everything downstream is judged against Phi, so these are kept far more
accurate than the Monte Carlo noise floor:

  normal_cdf       scipy.special.ndtr (Cephes erf/erfc rational evaluation)
  normal_quantile  scipy.special.ndtri, refined by one Newton step on ndtr
  ks_distance      two-sided order-statistic formula
                   D = max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n)

Public API
----------
normal_cdf(x) -> float
normal_quantile(p) -> float
ks_distance(values, cdf=normal_cdf) -> float
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy import special, stats

from core.errors import DomainError, InvalidArgumentError

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def normal_cdf(x: float) -> float:
    """P(Z <= x) for a standard normal Z."""
    if not math.isfinite(x):
        raise InvalidArgumentError(f"normal_cdf needs a finite argument, got {x!r}")
    return float(special.ndtr(x))


def normal_quantile(p: float) -> float:
    """z with P(Z <= z) = p, for 0 < p < 1."""
    if not (0.0 < p < 1.0):
        raise DomainError(f"normal_quantile needs 0 < p < 1, got {p!r}")
    z = float(special.ndtri(p))
    # One Newton step against ndtr; the density is bounded away from 0 on the
    # finite range ndtri returns for p in (0, 1).
    density = math.exp(-0.5 * z * z) / _SQRT_2PI
    if density > 0.0:
        z -= (float(special.ndtr(z)) - p) / density
    return z


def _vector_cdf(cdf: Callable) -> Callable[[np.ndarray], np.ndarray]:
    """Wrap a scalar CDF so scipy can evaluate it on an array."""
    if cdf is normal_cdf:
        return special.ndtr
    return np.vectorize(cdf, otypes=[float])


def ks_distance(
    values: np.ndarray | list[float],
    cdf: Callable[[float], float] = normal_cdf,
) -> float:
    """Kolmogorov–Smirnov distance between the empirical CDF of *values* and *cdf*.

    Args:
        values: Non-empty, ascending.  Duplicates are legitimate order
                statistics and are not merged.
        cdf:    Reference distribution function.  Defaults to Phi.

    Returns:
        D in [0, 1].  Only the statistic; no p-value is reported.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidArgumentError("ks_distance needs a non-empty 1-d vector")
    if np.any(np.diff(arr) < 0):
        raise InvalidArgumentError("ks_distance needs values sorted ascending")

    result = stats.ks_1samp(arr, _vector_cdf(cdf), method="asymp")
    return float(result.statistic)
