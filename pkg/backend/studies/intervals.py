"""studies/intervals.py — Bootstrap quantiles, one-sided bounds, coverage.

With B replicate values sorted ascending, the level-alpha quantile is the
l-th order statistic, l = floor(alpha * (B + 1)), feasible iff 1 <= l <= B.
A bound C covers when T_n <= C, with T_n = sqrt(n) (X_bar - mu) / S_n.

Statistic kinds:
  1  T*              Efron weights
  2  T**             Efron weights
  3  T**_{m_n,S_n}   Efron weights
  4  T*              i.i.d.-positive weights

Public API
----------
check_feasible(alpha, B) -> int
bootstrap_quantile(values, alpha) -> BootstrapQuantile
two_sided_bound(values, alpha) -> tuple[BootstrapQuantile, BootstrapQuantile]
bootstrap_replicates(sample, scheme, kind, B, seed) -> ReplicateDraws
build_bound(source, scheme, kind, B, alpha, seed, n=None) -> BootstrapQuantile
coverage_experiment(generator, scheme, kind, n, B, alpha, repetitions, seed) -> CoverageResult
quantile_convergence_study(generator, scheme, kind, settings, alpha, repetitions, seed) -> pd.DataFrame
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import pandas as pd

from core.errors import (
    ConfigurationError,
    DomainError,
    ExperimentError,
    InfeasibleQuantileError,
    InvalidArgumentError,
)
from resampling.numerics import normal_quantile
from resampling.sampling import (
    BootstrapScheme,
    DataGenerator,
    EfronScheme,
    IidPositiveScheme,
    draw_sample,
    draw_weights,
    regime_label,
)
from resampling.seeding import Seed
from resampling.statcore import Sample, Statistic, boot_t_batch
from studies.executor import ReplicateExecutor, blocks

logger = logging.getLogger(__name__)

MIN_COVERAGE_REPS = 100
REDRAW_CAP = 10


class StatisticKind(enum.IntEnum):
    T_STAR_EFRON = 1
    T_STAR_STAR_EFRON = 2
    T_STAR_STAR_SN_EFRON = 3
    T_STAR_IID_POSITIVE = 4

    @property
    def statistic(self) -> Statistic:
        return {
            StatisticKind.T_STAR_EFRON: Statistic.T_STAR,
            StatisticKind.T_STAR_STAR_EFRON: Statistic.T_STAR_STAR,
            StatisticKind.T_STAR_STAR_SN_EFRON: Statistic.T_STAR_STAR_SN,
            StatisticKind.T_STAR_IID_POSITIVE: Statistic.T_STAR,
        }[self]

    def check_scheme(self, scheme: BootstrapScheme) -> None:
        wants_iid = self is StatisticKind.T_STAR_IID_POSITIVE
        if wants_iid and not isinstance(scheme, IidPositiveScheme):
            raise ConfigurationError("statistic kind 4 needs i.i.d.-positive weights", field="kind")
        if not wants_iid and not isinstance(scheme, EfronScheme):
            raise ConfigurationError(f"statistic kind {int(self)} needs Efron weights", field="kind")


# ---------------------------------------------------------------------------
# Quantiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BootstrapQuantile:
    alpha: float
    B: int
    l: int
    value: float
    statistic_kind: StatisticKind | None = None


def _alpha_fraction(alpha: float) -> Fraction:
    # decimal reading of alpha, so 0.29 * 100 floors to 29 and not 28
    return Fraction(repr(float(alpha)))


def quantile_index(alpha: float, B: int) -> int:
    """l = floor(alpha * (B + 1)), computed exactly on the decimal alpha."""
    return math.floor(_alpha_fraction(alpha) * (B + 1))


def minimal_feasible_B(alpha: float) -> int | None:
    """Smallest B with 1 <= floor(alpha (B + 1)) <= B; None when alpha = 1."""
    a = _alpha_fraction(alpha)
    if a >= 1:
        return None
    return max(1, math.ceil(1 / a) - 1)


def _check_alpha(alpha: float) -> None:
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")


def check_feasible(alpha: float, B: int) -> int:
    """Return l for (alpha, B), or raise InfeasibleQuantileError naming the smallest feasible B."""
    _check_alpha(alpha)
    l = quantile_index(alpha, B)
    if l < 1 or l > B:
        raise InfeasibleQuantileError(alpha, B, minimal_feasible_B(alpha))
    return l


def bootstrap_quantile(values, alpha: float, kind: StatisticKind | None = None) -> BootstrapQuantile:
    """The l-th smallest of the replicate values.

    Raises:
        DomainError: alpha outside (0, 1].
        InfeasibleQuantileError: l < 1 or l > B; names the smallest feasible B.
    """
    arr = np.sort(np.asarray(values, dtype=float).ravel())
    B = int(arr.size)
    l = check_feasible(alpha, B)
    return BootstrapQuantile(alpha=float(alpha), B=B, l=l, value=float(arr[l - 1]), statistic_kind=kind)


def two_sided_bound(
    values, alpha: float, kind: StatisticKind | None = None
) -> tuple[BootstrapQuantile, BootstrapQuantile]:
    """Equal-tailed pair at levels (1 - alpha)/2 and (1 + alpha)/2."""
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"two-sided alpha must lie in (0, 1), got {alpha}")
    a = _alpha_fraction(alpha)
    lower = bootstrap_quantile(values, float((1 - a) / 2), kind)
    upper = bootstrap_quantile(values, float((1 + a) / 2), kind)
    return lower, upper


# ---------------------------------------------------------------------------
# Replicates for one sample
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReplicateDraws:
    """B non-degenerate replicate values with their weight diagnostics."""

    values: np.ndarray
    m_n_ratio: np.ndarray
    redraws: int


def bootstrap_replicates(
    sample: Sample,
    scheme: BootstrapScheme,
    kind: StatisticKind,
    B: int,
    seed: Seed,
    executor: ReplicateExecutor | None = None,
) -> ReplicateDraws:
    """B weight draws against one fixed sample; draw b uses seed.child(b).

    A degenerate draw is redrawn under purpose "weights-redraw-k", k <= REDRAW_CAP.

    Raises:
        DegenerateSampleError: S_n = 0.
        ExperimentError: a replicate stayed degenerate after REDRAW_CAP redraws.
    """
    kind.check_scheme(scheme)
    sample.require_nondegenerate()
    if B < 1:
        raise InvalidArgumentError(f"B must be >= 1, got {B}")
    statistic = kind.statistic
    n = sample.n
    pool = executor or ReplicateExecutor()

    def evaluate(rows: Sequence[int], tag: str) -> tuple[np.ndarray, np.ndarray]:
        draws = [draw_weights(scheme, n, seed.child(b).purpose(tag)) for b in rows]
        W = np.stack([w.weights for w in draws])
        masses = np.array([w.total_mass for w in draws], dtype=float)
        batch = boot_t_batch(sample.values, W, masses)
        return batch.values(statistic), batch.m_n_ratio

    def run_block(rows: range) -> tuple[np.ndarray, np.ndarray, int]:
        values, ratios = evaluate(rows, "weights")
        redraws = 0
        for k in range(1, REDRAW_CAP + 1):
            bad = np.flatnonzero(~np.isfinite(values))
            if bad.size == 0:
                break
            redraws += int(bad.size)
            values[bad], ratios[bad] = evaluate([rows[i] for i in bad], f"weights-redraw-{k}")
        if not np.all(np.isfinite(values)):
            raise ExperimentError(f"bootstrap replicate degenerate after {REDRAW_CAP} redraws")
        return values, ratios, redraws

    parts = pool.map(run_block, blocks(B), desc="bootstrap replicates")
    return ReplicateDraws(
        values=np.concatenate([p[0] for p in parts]),
        m_n_ratio=np.concatenate([p[1] for p in parts]),
        redraws=sum(p[2] for p in parts),
    )


def build_bound(
    source: Sample | DataGenerator,
    scheme: BootstrapScheme,
    kind: StatisticKind,
    B: int,
    alpha: float,
    seed: Seed,
    n: int | None = None,
    executor: ReplicateExecutor | None = None,
) -> BootstrapQuantile:
    """Level-alpha bootstrap bound for one sample (given, or drawn with size n)."""
    # fail before any drawing when the quantile cannot exist
    check_feasible(alpha, B)
    kind.check_scheme(scheme)

    if isinstance(source, DataGenerator):
        if n is None:
            raise InvalidArgumentError("building a bound from a generator needs n")
        sample = draw_sample(source, n, seed.purpose("data"))
    else:
        sample = source
    draws = bootstrap_replicates(sample, scheme, kind, B, seed, executor)
    return bootstrap_quantile(draws.values, alpha, kind)


# ---------------------------------------------------------------------------
# Coverage
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoverageResult:
    statistic_kind: StatisticKind
    n: int
    B: int
    nominal: float
    empirical: float
    repetitions: int
    mean_quantile: float
    z_alpha: float
    classical_empirical: float
    redraws: int
    regime: str

    @property
    def standard_error(self) -> float:
        return math.sqrt(self.nominal * (1.0 - self.nominal) / self.repetitions)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "kind": int(self.statistic_kind),
                    "statistic": self.statistic_kind.statistic.value,
                    "n": self.n,
                    "B": self.B,
                    "nominal": self.nominal,
                    "empirical": self.empirical,
                    "classical_empirical": self.classical_empirical,
                    "repetitions": self.repetitions,
                    "mean_quantile": self.mean_quantile,
                    "z_alpha": self.z_alpha,
                    "redraws": self.redraws,
                    "regime": self.regime,
                }
            ]
        )


def _draw_coverage_sample(generator: DataGenerator, n: int, seed: Seed) -> Sample:
    sample = draw_sample(generator, n, seed.purpose("data"))
    for k in range(1, REDRAW_CAP + 1):
        if sample.variance > 0:
            return sample
        sample = draw_sample(generator, n, seed.purpose(f"data-redraw-{k}"))
    sample.require_nondegenerate()
    return sample


def coverage_experiment(
    generator: DataGenerator,
    scheme: BootstrapScheme,
    kind: StatisticKind,
    n: int,
    B: int,
    alpha: float,
    repetitions: int,
    seed: Seed,
    executor: ReplicateExecutor | None = None,
) -> CoverageResult:
    """Fraction of `repetitions` fresh samples with T_n <= bootstrap bound.

    Repetition j draws its sample from seed.child(j) and its B weight
    vectors from seed.child(j, b).  The classical bound z_alpha is scored
    on the same samples.
    """
    if repetitions < MIN_COVERAGE_REPS:
        raise InvalidArgumentError(f"repetitions must be >= {MIN_COVERAGE_REPS}, got {repetitions}")
    if alpha >= 1.0:
        raise DomainError("coverage needs alpha < 1")
    check_feasible(alpha, B)
    kind.check_scheme(scheme)

    mu = generator.known_mean
    z_alpha = normal_quantile(alpha)
    inline = ReplicateExecutor(threads=1, progress=False)
    pool = executor or ReplicateExecutor()

    def run_block(rows: range) -> list[tuple[float, float, int]]:
        out = []
        for j in rows:
            rep_seed = seed.child(j)
            sample = _draw_coverage_sample(generator, n, rep_seed)
            t_n = math.sqrt(n) * (sample.mean - mu) / sample.std
            draws = bootstrap_replicates(sample, scheme, kind, B, rep_seed, inline)
            bound = bootstrap_quantile(draws.values, alpha, kind).value
            out.append((t_n, bound, draws.redraws))
        return out

    results = [row for part in pool.map(run_block, blocks(repetitions, 25), desc="coverage") for row in part]
    t_n = np.array([r[0] for r in results])
    bounds = np.array([r[1] for r in results])
    redraws = sum(r[2] for r in results)

    result = CoverageResult(
        statistic_kind=kind,
        n=n,
        B=B,
        nominal=float(alpha),
        empirical=float(np.mean(t_n <= bounds)),
        repetitions=repetitions,
        mean_quantile=float(bounds.mean()),
        z_alpha=z_alpha,
        classical_empirical=float(np.mean(t_n <= z_alpha)),
        redraws=redraws,
        regime=regime_label(scheme),
    )
    if redraws:
        logger.warning("coverage experiment redrew %d degenerate weight vectors", redraws)
    logger.info(
        "coverage experiment done",
        extra={
            "kind": int(kind),
            "n": n,
            "B": B,
            "alpha": alpha,
            "repetitions": repetitions,
            "empirical": result.empirical,
        },
    )
    return result


def quantile_convergence_study(
    generator: DataGenerator,
    scheme: BootstrapScheme,
    kind: StatisticKind,
    settings: Sequence[tuple[int, int]],
    alpha: float,
    repetitions: int,
    seed: Seed,
    executor: ReplicateExecutor | None = None,
) -> pd.DataFrame:
    """Mean bootstrap quantile against z_alpha along a grid of (n, B) settings.

    Setting k runs under seed.child(k).
    """
    rows = []
    for k, (n, B) in enumerate(settings):
        result = coverage_experiment(
            generator, scheme, kind, int(n), int(B), alpha, repetitions, seed.child(k), executor
        )
        rows.append(
            {
                "n": int(n),
                "B": int(B),
                "mean_quantile": result.mean_quantile,
                "z_alpha": result.z_alpha,
                "abs_error": abs(result.mean_quantile - result.z_alpha),
                "coverage": result.empirical,
                "classical_coverage": result.classical_empirical,
            }
        )
    return pd.DataFrame(rows)
