"""resampling/statcore.py — Sample moments, centred weights, and the t-statistics.

With a_i = v_i / m_n - 1/n (sum a_i = 0) the bootstrap mean deviation is
X*_bar - X_bar = sum a_i X_i, and

    T_n          = sqrt(n) * X_bar / S_n
    T*           = sum a_i X_i / (S_n * V_n),          V_n^2 = sum a_i^2
    T**          = sum a_i X_i / (S*_m / sqrt(m_n))
    T**_{m,S_n}  = sum a_i X_i / (S_n / sqrt(m_n))      = (S*_m / S_n) * T**

S_n^2 and S*^2 both use the plain denominators n and m_n.  Numerators are
computed on X_i - X_bar (equal because sum a_i = 0; less cancellation for
large-mean data).

Public API
----------
Sample, CenteredCoefficients, BootTriple, BootBatch, Statistic
center_weights(w) -> CenteredCoefficients
t_statistic(s) -> float
boot_sample_variance(s, w) -> float
boot_t_statistics(s, w) -> BootTriple
boot_t_batch(X, W, masses) -> BootBatch      (vectorised engine kernel)
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from core.errors import (
    DegenerateBootstrapSampleError,
    DegenerateSampleError,
    DegenerateWeightsError,
    InvalidArgumentError,
)

if TYPE_CHECKING:
    from resampling.sampling import WeightVector

# V_n^2 below this is floating-point residue of exactly cancelling weights.
# A genuine Efron V_n^2 is at least 2 / m_n^2.
V2_FLOOR = 1e-24

# S*^2 / S_n^2 below this is a one-point bootstrap sample.
BOOT_VAR_REL_FLOOR = 1e-24


class Statistic(str, enum.Enum):
    T_STAR = "t_star"
    T_STAR_STAR = "t_star_star"
    T_STAR_STAR_SN = "t_star_star_sn"
    CLASSICAL = "classical"


# ---------------------------------------------------------------------------
# Sample
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Sample:
    """Observations with cached mean X_bar and variance S_n^2 (denominator n)."""

    values: np.ndarray
    mean: float
    variance: float

    @classmethod
    def from_values(cls, values) -> "Sample":
        arr = np.array(values, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise InvalidArgumentError("a sample needs a non-empty 1-d vector of reals")
        if not np.all(np.isfinite(arr)):
            raise InvalidArgumentError("sample values must be finite")
        arr.setflags(write=False)
        mean = float(arr.mean())
        # two-pass: centre, then pairwise-summed squares
        variance = float(np.mean((arr - mean) ** 2))
        return cls(values=arr, mean=mean, variance=variance)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    @property
    def centered(self) -> np.ndarray:
        return self.values - self.mean

    def require_nondegenerate(self) -> None:
        if self.variance <= 0.0:
            raise DegenerateSampleError(f"sample of size {self.n} has S_n = 0")


# ---------------------------------------------------------------------------
# Centred weight coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CenteredCoefficients:
    a: np.ndarray
    v_n_sq: float
    max_a_sq: float

    @property
    def is_degenerate(self) -> bool:
        return self.v_n_sq <= V2_FLOOR


def center_weights(w: "WeightVector") -> CenteredCoefficients:
    """a_i = w_i / m_n - 1/n, with V_n^2 = sum a_i^2 and max_i a_i^2."""
    if w.n < 2:
        raise InvalidArgumentError(f"centring needs n >= 2 weights, got {w.n}")
    if not w.total_mass > 0:
        raise DegenerateWeightsError("total bootstrap mass m_n is 0")
    a = np.asarray(w.weights, dtype=float) / float(w.total_mass) - 1.0 / w.n
    a_sq = a * a
    return CenteredCoefficients(a=a, v_n_sq=float(a_sq.sum()), max_a_sq=float(a_sq.max()))


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

def t_statistic(s: Sample) -> float:
    """Student's T_n = sqrt(n) * X_bar / S_n."""
    s.require_nondegenerate()
    return math.sqrt(s.n) * s.mean / s.std


def boot_sample_variance(s: Sample, w: "WeightVector") -> float:
    """S*^2 = sum w_i (X_i - X*_bar)^2 / m_n, with X*_bar = sum w_i X_i / m_n."""
    if w.n != s.n:
        raise InvalidArgumentError(f"weights length {w.n} != sample size {s.n}")
    if not w.total_mass > 0:
        raise DegenerateWeightsError("total bootstrap mass m_n is 0")
    p = np.asarray(w.weights, dtype=float) / float(w.total_mass)
    xc = s.centered
    boot_mean_c = float(np.sum(p * xc))
    return float(np.sum(p * (xc - boot_mean_c) ** 2))


@dataclass(frozen=True)
class BootTriple:
    """T*, T** and T**_{m_n,S_n} for one (sample, weights) pair.

    t_star_star is None when S*^2 = 0; value() raises for it in that case.
    """

    t_star: float
    t_star_star: float | None
    t_star_star_sn: float
    boot_var: float
    numerator: float

    def value(self, statistic: Statistic) -> float:
        if statistic is Statistic.T_STAR:
            return self.t_star
        if statistic is Statistic.T_STAR_STAR_SN:
            return self.t_star_star_sn
        if statistic is Statistic.T_STAR_STAR:
            if self.t_star_star is None:
                raise DegenerateBootstrapSampleError("S*^2 = 0: T** is undefined")
            return self.t_star_star
        raise InvalidArgumentError(f"{statistic.value} is not a bootstrapped statistic")


def boot_t_statistics(s: Sample, w: "WeightVector") -> BootTriple:
    """The three bootstrapped t-statistics for one weight realization."""
    s.require_nondegenerate()
    coeffs = center_weights(w)
    if w.n != s.n:
        raise InvalidArgumentError(f"weights length {w.n} != sample size {s.n}")
    if coeffs.is_degenerate:
        raise DegenerateWeightsError("V_n^2 = 0: T* is undefined")

    m = float(w.total_mass)
    numerator = float(np.sum(coeffs.a * s.centered))
    boot_var = boot_sample_variance(s, w)

    t_star = numerator / (s.std * math.sqrt(coeffs.v_n_sq))
    t_star_star_sn = numerator / (s.std / math.sqrt(m))
    t_star_star = None
    if boot_var > BOOT_VAR_REL_FLOOR * s.variance:
        t_star_star = numerator / (math.sqrt(boot_var) / math.sqrt(m))

    return BootTriple(
        t_star=t_star,
        t_star_star=t_star_star,
        t_star_star_sn=t_star_star_sn,
        boot_var=boot_var,
        numerator=numerator,
    )


# ---------------------------------------------------------------------------
# Vectorised kernel
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BootBatch:
    """Row-wise statistics; NaN marks an undefined value in that row."""

    t_star: np.ndarray
    t_star_star: np.ndarray
    t_star_star_sn: np.ndarray
    classical: np.ndarray
    boot_var: np.ndarray
    sample_var: np.ndarray
    v_n_sq: np.ndarray
    max_a_sq: np.ndarray
    numerator: np.ndarray

    def values(self, statistic: Statistic) -> np.ndarray:
        return {
            Statistic.T_STAR: self.t_star,
            Statistic.T_STAR_STAR: self.t_star_star,
            Statistic.T_STAR_STAR_SN: self.t_star_star_sn,
            Statistic.CLASSICAL: self.classical,
        }[statistic]

    @property
    def m_n_ratio(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.v_n_sq > V2_FLOOR, self.max_a_sq / self.v_n_sq, np.nan)


def boot_t_batch(X: np.ndarray, W: np.ndarray, masses) -> BootBatch:
    """Statistics for paired rows of samples X and weights W.

    X is (R, n) or (n,); W is (B, n) or (n,); rows broadcast, so one fixed
    sample against many weight vectors (or the reverse) needs no copies.
    masses are the m_n of each weight row (scalar or (B,)).
    `classical` is sqrt(n) X_bar / S_n: subtract mu from X first.

    Reductions are row sums rather than BLAS products, so a row's value
    does not depend on which other rows share its batch.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    W = np.atleast_2d(np.asarray(W, dtype=float))
    masses = np.atleast_1d(np.asarray(masses, dtype=float))
    n = X.shape[1]
    if W.shape[1] != n:
        raise InvalidArgumentError(f"weights length {W.shape[1]} != sample size {n}")

    mean = X.mean(axis=1)
    xc = X - mean[:, None]
    sample_var = np.mean(xc * xc, axis=1)

    with np.errstate(divide="ignore", invalid="ignore"):
        P = W / masses[:, None]
        A = P - 1.0 / n
        a_sq = A * A
        v_n_sq = a_sq.sum(axis=1)
        max_a_sq = a_sq.max(axis=1)
        numerator = (A * xc).sum(axis=1)

        boot_mean_c = (P * xc).sum(axis=1)
        dev = xc - boot_mean_c[:, None]
        boot_var = (P * dev * dev).sum(axis=1)

        s_n = np.sqrt(sample_var)
        sample_ok = sample_var > 0.0
        weights_ok = (v_n_sq > V2_FLOOR) & (masses > 0)
        boot_ok = sample_ok & (boot_var > BOOT_VAR_REL_FLOOR * sample_var)
        root_m = np.sqrt(masses)

        t_star = np.where(sample_ok & weights_ok, numerator / (s_n * np.sqrt(v_n_sq)), np.nan)
        t_star_star = np.where(boot_ok & weights_ok, numerator / (np.sqrt(boot_var) / root_m), np.nan)
        t_star_star_sn = np.where(sample_ok & weights_ok, numerator / (s_n / root_m), np.nan)
        classical = np.where(sample_ok, math.sqrt(n) * mean / s_n, np.nan)

    return BootBatch(
        t_star=t_star,
        t_star_star=t_star_star,
        t_star_star_sn=t_star_star_sn,
        classical=classical,
        boot_var=boot_var,
        sample_var=sample_var,
        v_n_sq=v_n_sq,
        max_a_sq=max_a_sq,
        numerator=numerator,
    )
