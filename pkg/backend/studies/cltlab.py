"""studies/cltlab.py — Conditional (and unconditional) laws of the bootstrapped t-statistics.

Two conditioning paradigms, each summarised by the KS distance to Phi:

  on weights   one weight vector held fixed, R fresh samples     P_{X|v}
  on data      one sample held fixed, R fresh Efron weight draws P_{w|X}

"Convergence in probability of the conditional law" is read at finite n as:
the median KS over `outer_reps` independent fixed realizations is small, and
few realizations exceed twice the threshold.

Seed labels: realization o uses seed.child(o); inner replicate r of that
realization uses seed.child(o, r) with purpose "data" or "weights".  The
unconditional path uses the same labels, so paired comparisons line up.

Public API
----------
conditional_on_weights(w, generator, statistic, R, seed) -> EmpiricalDistribution
conditional_on_data(s, scheme, statistic, R, seed) -> EmpiricalDistribution
unconditional_distribution(generator, scheme, statistic, n, reps, seed) -> EmpiricalDistribution
run_conditioning_study(config) -> ConditioningStudy
check_regime(paradigm, scheme, statistic) -> str
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import pandas as pd

from core.errors import (
    ConfigurationError,
    DegenerateError,
    DegenerateWeightsError,
    ExperimentError,
    InvalidArgumentError,
    UnsupportedModeError,
)
from resampling.numerics import ks_distance
from resampling.sampling import (
    BootstrapScheme,
    DataGenerator,
    EfronScheme,
    WeightVector,
    draw_efron_weights,
    draw_sample,
    draw_weights,
    regime_label,
)
from resampling.seeding import Seed
from resampling.statcore import Sample, Statistic, boot_t_batch, center_weights
from studies.executor import ReplicateExecutor, blocks

logger = logging.getLogger(__name__)

MIN_INNER_REPS = 500
DEFAULT_KS_THRESHOLD = 0.05


class Paradigm(str, enum.Enum):
    ON_WEIGHTS = "on-weights"
    ON_DATA = "on-data"


# ---------------------------------------------------------------------------
# Result types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted replicate values of a statistic and their KS distance to Phi."""

    values: np.ndarray
    ks_to_normal: float
    degenerate_count: int
    R: int

    @classmethod
    def from_replicates(cls, raw: np.ndarray) -> "EmpiricalDistribution":
        """NaN entries are degenerate replicates: counted, then dropped."""
        raw = np.asarray(raw, dtype=float)
        ok = np.isfinite(raw)
        values = np.sort(raw[ok])
        if values.size == 0:
            raise ExperimentError(f"all {raw.size} replicates were degenerate")
        return cls(
            values=values,
            ks_to_normal=ks_distance(values),
            degenerate_count=int(raw.size - values.size),
            R=int(raw.size),
        )


@dataclass(frozen=True)
class RealizationSummary:
    """One fixed weight vector (on weights) or one fixed sample (on data)."""

    index: int
    ks: float                  # NaN when the realization itself was degenerate
    degenerate_count: int
    m_n: float
    m_n_ratio: float           # NaN on data
    sample_sd: float           # NaN on weights


@dataclass
class ConditioningStudy:
    paradigm: Paradigm
    statistic: Statistic
    regime: str
    outer_reps: int
    inner_reps: int
    threshold: float
    realizations: list[RealizationSummary] = field(default_factory=list)

    @property
    def per_realization_ks(self) -> np.ndarray:
        return np.array([r.ks for r in self.realizations], dtype=float)

    @property
    def _valid_ks(self) -> np.ndarray:
        ks = self.per_realization_ks
        return ks[np.isfinite(ks)]

    @property
    def degenerate_realizations(self) -> int:
        return int(self.outer_reps - self._valid_ks.size)

    @property
    def median_ks(self) -> float:
        return float(np.median(self._valid_ks))

    @property
    def frac_above_2x_threshold(self) -> float:
        return float(np.mean(self._valid_ks > 2.0 * self.threshold))

    @property
    def degenerate_replicates(self) -> int:
        return int(sum(r.degenerate_count for r in self.realizations))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "realization": [r.index for r in self.realizations],
                "ks": [r.ks for r in self.realizations],
                "degenerate_count": [r.degenerate_count for r in self.realizations],
                "m_n": [r.m_n for r in self.realizations],
                "Mn": [r.m_n_ratio for r in self.realizations],
                "sample_sd": [r.sample_sd for r in self.realizations],
            }
        )

    def summary_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "paradigm": self.paradigm.value,
                    "statistic": self.statistic.value,
                    "regime": self.regime,
                    "outer_reps": self.outer_reps,
                    "inner_reps": self.inner_reps,
                    "median_ks": self.median_ks,
                    "threshold": self.threshold,
                    "frac_above_2x_threshold": self.frac_above_2x_threshold,
                    "degenerate_realizations": self.degenerate_realizations,
                    "degenerate_replicates": self.degenerate_replicates,
                }
            ]
        )


# ---------------------------------------------------------------------------
# Regime checks
# ---------------------------------------------------------------------------

# m-rule kinds satisfying n = o(m_n); "fixed" cannot be judged from one n.
_N_LITTLE_O_M = {"big-ratio", "nlogn", "sqrt-cap", "fixed"}


def check_regime(paradigm: Paradigm, scheme: BootstrapScheme, statistic: Statistic) -> str:
    """Validate a (paradigm, scheme, statistic) triple; return its regime label.

    Raises:
        UnsupportedModeError: on-data with a non-Efron scheme, or a statistic
                              the paradigm does not define.
        ConfigurationError:   the m-rule does not instantiate the regime the
                              statistic needs (message names the regime).
    """
    if paradigm is Paradigm.ON_WEIGHTS:
        if statistic not in (Statistic.T_STAR, Statistic.T_STAR_STAR):
            raise UnsupportedModeError(
                f"conditioning on weights studies t_star or t_star_star, not {statistic.value}",
                field="statistic",
            )
        if (
            statistic is Statistic.T_STAR_STAR
            and isinstance(scheme, EfronScheme)
            and scheme.m_rule.kind not in _N_LITTLE_O_M
        ):
            raise ConfigurationError(
                f"t_star_star conditional on Efron weights needs the n=o(m_n) regime; "
                f"m_rule {scheme.m_rule.to_spec()} gives {scheme.m_rule.regime}",
                field="m_rule",
            )
        return regime_label(scheme)

    if not isinstance(scheme, EfronScheme):
        raise UnsupportedModeError(
            "conditioning on the data is defined for Efron's scheme only", field="scheme"
        )
    if statistic not in (Statistic.T_STAR_STAR, Statistic.T_STAR_STAR_SN):
        raise UnsupportedModeError(
            f"conditioning on data studies t_star_star or t_star_star_sn, not {statistic.value}",
            field="statistic",
        )
    if statistic is Statistic.T_STAR_STAR and scheme.m_rule.kind not in _N_LITTLE_O_M:
        raise ConfigurationError(
            f"t_star_star conditional on the data needs m_n/n -> inf "
            f"(or m_n/(2n log n) -> inf); m_rule {scheme.m_rule.to_spec()} gives {scheme.m_rule.regime}",
            field="m_rule",
        )
    return regime_label(scheme)


# ---------------------------------------------------------------------------
# Conditional laws
# ---------------------------------------------------------------------------

def _collect(
    R: int,
    block_fn: Callable[[range], np.ndarray],
    executor: ReplicateExecutor | None,
    desc: str,
) -> np.ndarray:
    pool = executor or ReplicateExecutor()
    return np.concatenate(pool.map(block_fn, blocks(R), desc=desc))


def conditional_on_weights(
    w: WeightVector,
    generator: DataGenerator,
    statistic: Statistic,
    R: int,
    seed: Seed,
    executor: ReplicateExecutor | None = None,
) -> EmpiricalDistribution:
    """Law of T* or T** given one fixed weight vector, from R fresh samples."""
    if statistic not in (Statistic.T_STAR, Statistic.T_STAR_STAR):
        raise UnsupportedModeError(f"{statistic.value} is not studied conditional on weights")
    if R < MIN_INNER_REPS:
        raise InvalidArgumentError(f"R must be >= {MIN_INNER_REPS}, got {R}")
    if center_weights(w).is_degenerate:
        raise DegenerateWeightsError("fixed weight vector has V_n^2 = 0")

    n = w.n

    def run_block(rows: range) -> np.ndarray:
        X = np.stack([generator.draw(seed.child(r).purpose("data").generator(), n) for r in rows])
        return boot_t_batch(X, w.weights, w.total_mass).values(statistic)

    return EmpiricalDistribution.from_replicates(_collect(R, run_block, executor, "on weights"))


def conditional_on_data(
    s: Sample,
    scheme: BootstrapScheme,
    statistic: Statistic,
    R: int,
    seed: Seed,
    executor: ReplicateExecutor | None = None,
) -> EmpiricalDistribution:
    """Law of T** or T**_{m_n,S_n} given one fixed sample, from R Efron weight draws."""
    if not isinstance(scheme, EfronScheme):
        raise UnsupportedModeError("conditioning on the data is defined for Efron's scheme only")
    if statistic not in (Statistic.T_STAR_STAR, Statistic.T_STAR_STAR_SN):
        raise UnsupportedModeError(f"{statistic.value} is not studied conditional on the data")
    if R < MIN_INNER_REPS:
        raise InvalidArgumentError(f"R must be >= {MIN_INNER_REPS}, got {R}")
    s.require_nondegenerate()

    n = s.n
    m = scheme.m_rule(n)

    def run_block(rows: range) -> np.ndarray:
        W = np.stack([draw_efron_weights(n, m, seed.child(r).purpose("weights")).weights for r in rows])
        return boot_t_batch(s.values, W, m).values(statistic)

    return EmpiricalDistribution.from_replicates(_collect(R, run_block, executor, "on data"))


def unconditional_distribution(
    generator: DataGenerator,
    scheme: BootstrapScheme | None,
    statistic: Statistic,
    n: int,
    reps: int,
    seed: Seed,
    executor: ReplicateExecutor | None = None,
) -> EmpiricalDistribution:
    """Joint law: every replicate draws a fresh sample AND fresh weights.

    `Statistic.CLASSICAL` gives the baseline law of T_n (scheme ignored).
    """
    if reps < MIN_INNER_REPS:
        raise InvalidArgumentError(f"reps must be >= {MIN_INNER_REPS}, got {reps}")
    if statistic is not Statistic.CLASSICAL and scheme is None:
        raise ConfigurationError("a bootstrapped statistic needs a scheme", field="scheme")

    def run_block(rows: range) -> np.ndarray:
        X = np.stack([generator.draw(seed.child(r).purpose("data").generator(), n) for r in rows])
        if statistic is Statistic.CLASSICAL:
            # T_n = sqrt(n) (X_bar - mu) / S_n
            return boot_t_batch(X - generator.known_mean, np.ones(n), float(n)).classical
        weights = [draw_weights(scheme, n, seed.child(r).purpose("weights")) for r in rows]
        W = np.stack([w.weights for w in weights])
        masses = np.array([w.total_mass for w in weights], dtype=float)
        return boot_t_batch(X, W, masses).values(statistic)

    return EmpiricalDistribution.from_replicates(_collect(reps, run_block, executor, "unconditional"))


# ---------------------------------------------------------------------------
# Study driver
# ---------------------------------------------------------------------------

def run_conditioning_study(config, executor: ReplicateExecutor | None = None) -> ConditioningStudy:
    """outer_reps fixed realizations x inner_reps conditional replicates each.

    Args:
        config: schemas.config.CltConfig (validated).

    Raises:
        ConfigurationError / UnsupportedModeError: inconsistent regime.
        ExperimentError: every realization was degenerate.
    """
    paradigm = Paradigm(config.paradigm)
    statistic = Statistic(config.statistic)
    scheme = config.build_scheme()
    generator = config.build_generator()
    regime = check_regime(paradigm, scheme, statistic)
    seed = Seed(root=config.seed, experiment="clt")
    n = config.n

    study = ConditioningStudy(
        paradigm=paradigm,
        statistic=statistic,
        regime=regime,
        outer_reps=config.outer_reps,
        inner_reps=config.inner_reps,
        threshold=config.ks_threshold,
    )

    for o in range(config.outer_reps):
        outer_seed = seed.child(o)
        try:
            if paradigm is Paradigm.ON_WEIGHTS:
                w = draw_weights(scheme, n, outer_seed.purpose("weights"))
                coeffs = center_weights(w)
                m_n_ratio = coeffs.max_a_sq / coeffs.v_n_sq if not coeffs.is_degenerate else float("nan")
                dist = conditional_on_weights(w, generator, statistic, config.inner_reps, outer_seed, executor)
                summary = RealizationSummary(
                    o, dist.ks_to_normal, dist.degenerate_count, float(w.total_mass), m_n_ratio, float("nan")
                )
            else:
                s = draw_sample(generator, n, outer_seed.purpose("data"))
                dist = conditional_on_data(s, scheme, statistic, config.inner_reps, outer_seed, executor)
                summary = RealizationSummary(
                    o, dist.ks_to_normal, dist.degenerate_count, float(scheme.m_rule(n)), float("nan"), s.std
                )
        except DegenerateError as exc:
            logger.debug("realization %d degenerate: %s", o, exc)
            summary = RealizationSummary(o, float("nan"), config.inner_reps, float("nan"), float("nan"), float("nan"))
        study.realizations.append(summary)

    if study.degenerate_realizations == study.outer_reps:
        raise ExperimentError(f"all {study.outer_reps} realizations were degenerate")
    if study.degenerate_realizations or study.degenerate_replicates:
        logger.warning(
            "conditioning study had degenerate draws",
            extra={
                "degenerate_realizations": study.degenerate_realizations,
                "degenerate_replicates": study.degenerate_replicates,
            },
        )

    logger.info(
        "conditioning study done",
        extra={
            "paradigm": paradigm.value,
            "statistic": statistic.value,
            "regime": regime,
            "n": n,
            "outer_reps": config.outer_reps,
            "inner_reps": config.inner_reps,
            "median_ks": study.median_ks,
        },
    )
    return study
