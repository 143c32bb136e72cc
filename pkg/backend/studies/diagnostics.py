"""studies/diagnostics.py — Weight negligibility, Lindeberg probes, variance-ratio checks.

These measure, on finite n, the quantities the bootstrap CLTs need to vanish:

  M_n = max_i a_i^2 / V_n^2                      weight negligibility
  P(max_i V_{i,n} / denom > eps)                 Lindeberg-type probe
  (S*^2 / m_n) / (sigma^2 V_n^2) - 1             variance-ratio deviation

with V_{i,n} = |a_i (X_i - mu)| and denom = S_n V_n (T*) or S*/sqrt(m_n) (T**).

Public API
----------
max_negligibility(w) -> float
sample_weight_statistics(scheme, n, reps, seed) -> WeightDrawStats
m_n_decay_study(scheme, n_grid, reps, seed) -> pd.DataFrame
efron_moment_oracles(n, m, reps, seed) -> pd.DataFrame
lindeberg_probe(w, generator, epsilon, R, mode, seed) -> float
negligibility_report(w, generator, epsilon_grid, R, mode, seed) -> NegligibilityReport
variance_ratio_probe(w, generator, R, seed, sigma_sq=None) -> VarianceRatioReport
fixed_n_consistency_study(sample, m_grid, draws, seed) -> pd.DataFrame
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from core.errors import (
    DegenerateWeightsError,
    InvalidArgumentError,
    UnsupportedModeError,
)
from resampling.sampling import (
    BootstrapScheme,
    DataGenerator,
    EfronScheme,
    SchemeTag,
    WeightVector,
    draw_efron_weights,
    draw_weights,
)
from resampling.seeding import Seed
from resampling.statcore import (
    BOOT_VAR_REL_FLOOR,
    V2_FLOOR,
    Sample,
    Statistic,
    boot_t_batch,
    center_weights,
)
from studies.executor import ReplicateExecutor, blocks

logger = logging.getLogger(__name__)

MIN_DIAGNOSTIC_REPS = 100
SAMPLE_RETRY_CAP = 10

DECAY_COLUMNS = ["n", "m", "mean_Vn2", "expected_Vn2", "Mn_p50", "Mn_p90", "Mn_p99", "degenerate_count"]


def _require_reps(value: int, name: str = "reps") -> None:
    if value < MIN_DIAGNOSTIC_REPS:
        raise InvalidArgumentError(f"{name} must be >= {MIN_DIAGNOSTIC_REPS}, got {value}")


# ---------------------------------------------------------------------------
# Weight negligibility
# ---------------------------------------------------------------------------

def max_negligibility(w: WeightVector) -> float:
    """M_n = max_i a_i^2 / V_n^2, in [1/n, 1]."""
    coeffs = center_weights(w)
    if coeffs.is_degenerate:
        raise DegenerateWeightsError("V_n^2 = 0: M_n is undefined")
    return coeffs.max_a_sq / coeffs.v_n_sq


@dataclass(frozen=True)
class WeightDrawStats:
    """Per-draw V_n^2, M_n and m_n for `reps` weight vectors at one n.

    m_n_ratio is NaN where the draw was degenerate.
    """

    n: int
    v_n_sq: np.ndarray
    m_n_ratio: np.ndarray
    masses: np.ndarray

    @property
    def degenerate_count(self) -> int:
        return int(np.sum(~np.isfinite(self.m_n_ratio)))


def sample_weight_statistics(
    scheme: BootstrapScheme,
    n: int,
    reps: int,
    seed: Seed,
    executor: ReplicateExecutor | None = None,
) -> WeightDrawStats:
    """Draw `reps` weight vectors at size n; draw r uses seed.child(n, r)."""
    if n < 2:
        raise InvalidArgumentError(f"weight diagnostics need n >= 2, got {n}")
    pool = executor or ReplicateExecutor()

    def run_block(rows: range) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        draws = [draw_weights(scheme, n, seed.child(n, r).purpose("weights")) for r in rows]
        W = np.stack([w.weights for w in draws]).astype(float)
        masses = np.array([w.total_mass for w in draws], dtype=float)
        A = W / masses[:, None] - 1.0 / n
        a_sq = A * A
        v_n_sq = a_sq.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(v_n_sq > V2_FLOOR, a_sq.max(axis=1) / v_n_sq, np.nan)
        return v_n_sq, ratio, masses

    parts = pool.map(run_block, blocks(reps), desc=f"weights n={n}")
    return WeightDrawStats(
        n=n,
        v_n_sq=np.concatenate([p[0] for p in parts]),
        m_n_ratio=np.concatenate([p[1] for p in parts]),
        masses=np.concatenate([p[2] for p in parts]),
    )


def expected_v_n_sq(scheme: BootstrapScheme, n: int) -> float:
    """E V_n^2 = (1 - 1/n) / m_n under Efron's scheme; NaN otherwise."""
    if isinstance(scheme, EfronScheme):
        return (1.0 - 1.0 / n) / scheme.m_rule(n)
    return float("nan")


def m_n_decay_study(
    scheme: BootstrapScheme,
    n_grid: Sequence[int],
    reps: int,
    seed: Seed,
    executor: ReplicateExecutor | None = None,
) -> pd.DataFrame:
    """One row per n: mean V_n^2 against its expectation, and M_n quantiles.

    For i.i.d.-positive weights the `m` column is the mean total mass.
    """
    _require_reps(reps)
    rows = []
    for n in n_grid:
        stats = sample_weight_statistics(scheme, int(n), reps, seed, executor)
        ratios = stats.m_n_ratio[np.isfinite(stats.m_n_ratio)]
        p50, p90, p99 = (np.quantile(ratios, [0.5, 0.9, 0.99]) if ratios.size else (np.nan,) * 3)
        m = scheme.m_rule(int(n)) if isinstance(scheme, EfronScheme) else float(stats.masses.mean())
        rows.append(
            {
                "n": int(n),
                "m": m,
                "mean_Vn2": float(stats.v_n_sq.mean()),
                "expected_Vn2": expected_v_n_sq(scheme, int(n)),
                "Mn_p50": float(p50),
                "Mn_p90": float(p90),
                "Mn_p99": float(p99),
                "degenerate_count": stats.degenerate_count,
            }
        )
        if stats.degenerate_count:
            logger.warning("degenerate weight draws at n=%d: %d of %d", n, stats.degenerate_count, reps)
    return pd.DataFrame(rows, columns=DECAY_COLUMNS)


def efron_moment_oracles(
    n: int,
    m: int,
    reps: int,
    seed: Seed,
    executor: ReplicateExecutor | None = None,
) -> pd.DataFrame:
    """Monte Carlo moments of Efron weights against their closed forms.

    Rows: E w_1, Var w_1, E (w_1/m - 1/n)^2, E V_n^2, each with the Monte
    Carlo standard error and the z-score of the empirical value.
    """
    _require_reps(reps)
    pool = executor or ReplicateExecutor()

    def run_block(rows: range) -> tuple[np.ndarray, np.ndarray]:
        W = np.stack([draw_efron_weights(n, m, seed.child(n, r).purpose("weights")).weights for r in rows])
        W = W.astype(float)
        return W[:, 0], ((W / m - 1.0 / n) ** 2).sum(axis=1)

    parts = pool.map(run_block, blocks(reps), desc="efron moments")
    w1 = np.concatenate([p[0] for p in parts])
    v_n_sq = np.concatenate([p[1] for p in parts])
    a1_sq = (w1 / m - 1.0 / n) ** 2
    centred_sq = (w1 - m / n) ** 2

    p = 1.0 / n
    checks = [
        ("E[w1]", w1, m * p),
        ("Var[w1]", centred_sq, m * p * (1.0 - p)),
        ("E[(w1/m-1/n)^2]", a1_sq, (1.0 - p) / (n * m)),
        ("E[Vn2]", v_n_sq, (1.0 - p) / m),
    ]
    rows = []
    for quantity, draws, expected in checks:
        empirical = float(draws.mean())
        se = float(draws.std(ddof=1) / math.sqrt(draws.size))
        rows.append(
            {
                "quantity": quantity,
                "n": n,
                "m": m,
                "empirical": empirical,
                "expected": expected,
                "se": se,
                "z": (empirical - expected) / se if se > 0 else 0.0,
            }
        )
    return pd.DataFrame(rows)


# ---------------------------------------------------------------------------
# Lindeberg-type probe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NegligibilityReport:
    mode: Statistic
    m_n_ratio: float
    v_n_sq: float
    expected_v_n_sq: float
    epsilon_grid: tuple[float, ...]
    probe_estimates: tuple[float, ...]
    replicates_used: int
    degenerate_count: int

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "epsilon": list(self.epsilon_grid),
                "probe": list(self.probe_estimates),
                "mode": self.mode.value,
                "Mn": self.m_n_ratio,
                "Vn2": self.v_n_sq,
                "expected_Vn2": self.expected_v_n_sq,
                "replicates_used": self.replicates_used,
                "degenerate_count": self.degenerate_count,
            }
        )


def _draw_nondegenerate_rows(
    generator: DataGenerator,
    n: int,
    rows: range,
    seed: Seed,
    ok,
) -> tuple[np.ndarray, np.ndarray]:
    """Samples for `rows`, redrawing rows that fail `ok` up to SAMPLE_RETRY_CAP times.

    Returns the (len(rows), n) matrix and a mask of rows that became valid.
    """
    X = np.stack([generator.draw(seed.child(r).purpose("data").generator(), n) for r in rows])
    valid = ok(X)
    for attempt in range(1, SAMPLE_RETRY_CAP + 1):
        bad = np.flatnonzero(~valid)
        if bad.size == 0:
            break
        for i in bad:
            rng = seed.child(rows[i]).purpose(f"data-retry-{attempt}").generator()
            X[i] = generator.draw(rng, n)
        valid[bad] = ok(X[bad])
    return X, valid


def negligibility_report(
    w: WeightVector,
    generator: DataGenerator,
    epsilon_grid: Sequence[float],
    R: int,
    mode: Statistic,
    seed: Seed,
    executor: ReplicateExecutor | None = None,
) -> NegligibilityReport:
    """Lindeberg probe at every epsilon of the grid from one shared replicate set.

    Sharing the replicates makes the estimates non-increasing in epsilon.
    """
    if mode not in (Statistic.T_STAR, Statistic.T_STAR_STAR):
        raise UnsupportedModeError(f"probe mode must be t_star or t_star_star, not {mode.value}", field="mode")
    eps = np.asarray(list(epsilon_grid), dtype=float)
    if eps.size == 0 or not np.all(eps > 0):
        raise InvalidArgumentError("epsilon values must be positive")
    _require_reps(R, "R")
    coeffs = center_weights(w)
    if coeffs.is_degenerate:
        raise DegenerateWeightsError("fixed weight vector has V_n^2 = 0")

    n = w.n
    m = float(w.total_mass)
    mu = generator.known_mean
    abs_a = np.abs(coeffs.a)
    v_n = math.sqrt(coeffs.v_n_sq)
    pool = executor or ReplicateExecutor()

    def denominators(X: np.ndarray) -> np.ndarray:
        batch = boot_t_batch(X, w.weights, m)
        if mode is Statistic.T_STAR:
            return np.sqrt(batch.sample_var) * v_n
        return np.where(np.isfinite(batch.t_star_star), np.sqrt(batch.boot_var / m), 0.0)

    def run_block(rows: range) -> tuple[np.ndarray, int]:
        X, valid = _draw_nondegenerate_rows(generator, n, rows, seed, lambda Y: denominators(Y) > 0)
        X = X[valid]
        # per-replicate max_i V_{i,n} / denom; exceeding any eps at some i == exceeding at the max
        counts = np.zeros((eps.size, n), dtype=np.int64)
        if X.shape[0]:
            ratios = abs_a[None, :] * np.abs(X - mu) / denominators(X)[:, None]
            counts = (ratios[None, :, :] > eps[:, None, None]).sum(axis=1)
        return counts, int(valid.sum())

    parts = pool.map(run_block, blocks(R), desc="lindeberg probe")
    counts = sum(p[0] for p in parts)
    used = sum(p[1] for p in parts)
    if used == 0:
        raise DegenerateWeightsError("no replicate produced a positive denominator")
    # max_i of the per-i exceedance frequency
    probes = counts.max(axis=1) / used

    degenerate = R - used
    if degenerate:
        logger.warning("lindeberg probe dropped %d degenerate replicates", degenerate)
    return NegligibilityReport(
        mode=mode,
        m_n_ratio=coeffs.max_a_sq / coeffs.v_n_sq,
        v_n_sq=coeffs.v_n_sq,
        expected_v_n_sq=(1.0 - 1.0 / n) / m if w.scheme_tag is SchemeTag.EFRON else float("nan"),
        epsilon_grid=tuple(float(e) for e in eps),
        probe_estimates=tuple(float(p) for p in probes),
        replicates_used=used,
        degenerate_count=degenerate,
    )


def lindeberg_probe(
    w: WeightVector,
    generator: DataGenerator,
    epsilon: float,
    R: int,
    mode: Statistic,
    seed: Seed,
    executor: ReplicateExecutor | None = None,
) -> float:
    """max_i estimate of P(V_{i,n} / denom > epsilon) over R fresh samples."""
    return negligibility_report(w, generator, [epsilon], R, mode, seed, executor).probe_estimates[0]


# ---------------------------------------------------------------------------
# Variance-ratio probe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VarianceRatioReport:
    """ratio = (S*^2 / m_n) / (sigma^2 V_n^2) per draw; deviation = |ratio - 1|."""

    ratios: np.ndarray
    deviations: np.ndarray
    sigma_sq: float
    degenerate_count: int

    def quantiles(self, probs: Sequence[float] = (0.5, 0.9, 0.99)) -> dict[str, float]:
        return {f"p{round(100 * p)}": float(np.quantile(self.deviations, p)) for p in probs}


def variance_ratio_probe(
    w: WeightVector,
    generator: DataGenerator,
    R: int,
    seed: Seed,
    sigma_sq: float | None = None,
    executor: ReplicateExecutor | None = None,
) -> VarianceRatioReport:
    """Deviation of the bootstrap variance ratio from 1 over R samples given w.

    sigma_sq defaults to the generator's known variance.  Draws with S*^2 = 0
    have ratio 0 and deviation 1; they are kept and counted as degenerate.
    """
    _require_reps(R, "R")
    if not generator.has_finite_variance:
        raise UnsupportedModeError("variance-ratio probe needs a finite-variance generator", field="generator")
    if sigma_sq is None:
        sigma_sq = generator.known_sigma ** 2
    if not sigma_sq > 0:
        raise UnsupportedModeError("variance-ratio probe needs a positive variance", field="generator")
    coeffs = center_weights(w)
    if coeffs.is_degenerate:
        raise DegenerateWeightsError("fixed weight vector has V_n^2 = 0")

    n = w.n
    m = float(w.total_mass)
    pool = executor or ReplicateExecutor()

    def run_block(rows: range) -> tuple[np.ndarray, np.ndarray]:
        X = np.stack([generator.draw(seed.child(r).purpose("data").generator(), n) for r in rows])
        batch = boot_t_batch(X, w.weights, m)
        return batch.boot_var, batch.sample_var

    parts = pool.map(run_block, blocks(R), desc="variance ratio")
    boot_var = np.concatenate([p[0] for p in parts])
    sample_var = np.concatenate([p[1] for p in parts])
    ratios = (boot_var / m) / (sigma_sq * coeffs.v_n_sq)
    degenerate = int(np.sum(boot_var <= BOOT_VAR_REL_FLOOR * sample_var))
    if degenerate:
        logger.warning("variance-ratio probe: %d draws with S*^2 = 0", degenerate)
    return VarianceRatioReport(
        ratios=ratios,
        deviations=np.abs(ratios - 1.0),
        sigma_sq=float(sigma_sq),
        degenerate_count=degenerate,
    )


# ---------------------------------------------------------------------------
# Fixed-n consistency
# ---------------------------------------------------------------------------

FIXED_N_COLUMNS = [
    "m",
    "median_rel_err_var",
    "p90_rel_err_var",
    "median_rel_err_mean",
    "degenerate_count",
]


def fixed_n_consistency_study(
    sample: Sample,
    m_grid: Sequence[int],
    draws: int,
    seed: Seed,
    executor: ReplicateExecutor | None = None,
) -> pd.DataFrame:
    """With the sample frozen, S*^2 -> S_n^2 and X*_bar -> X_bar as m grows.

    rel_err_var = |S*^2 - S_n^2| / S_n^2 and rel_err_mean = |X*_bar - X_bar| / S_n,
    over `draws` Efron weight vectors per m.  m = 1 gives S*^2 = 0 every time;
    those draws stay in the table (error 1) and are counted as degenerate.
    """
    _require_reps(draws, "draws")
    sample.require_nondegenerate()
    n = sample.n
    pool = executor or ReplicateExecutor()
    rows = []
    for m in m_grid:
        m = int(m)

        def run_block(block: range, m: int = m) -> tuple[np.ndarray, np.ndarray]:
            W = np.stack([draw_efron_weights(n, m, seed.child(m, r).purpose("weights")).weights for r in block])
            P = W / float(m)
            xc = sample.centered
            boot_mean_c = (P * xc).sum(axis=1)
            dev = xc[None, :] - boot_mean_c[:, None]
            boot_var = (P * dev * dev).sum(axis=1)
            return boot_var, boot_mean_c

        parts = pool.map(run_block, blocks(draws), desc=f"fixed n m={m}")
        boot_var = np.concatenate([p[0] for p in parts])
        boot_mean_c = np.concatenate([p[1] for p in parts])
        rel_var = np.abs(boot_var - sample.variance) / sample.variance
        rel_mean = np.abs(boot_mean_c) / sample.std
        rows.append(
            {
                "m": m,
                "median_rel_err_var": float(np.median(rel_var)),
                "p90_rel_err_var": float(np.quantile(rel_var, 0.9)),
                "median_rel_err_mean": float(np.median(rel_mean)),
                "degenerate_count": int(np.sum(boot_var <= BOOT_VAR_REL_FLOOR * sample.variance)),
            }
        )
    return pd.DataFrame(rows, columns=FIXED_N_COLUMNS)

