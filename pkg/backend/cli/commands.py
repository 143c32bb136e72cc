"""cli/commands.py — One function per subcommand: run the study, write its files.

Each cmd_* takes a validated config, runs under Seed(root=config.seed,
experiment=<command>) on a ReplicateExecutor with config.threads, and
returns the paths it wrote (result tables first, then manifests).
"""

from __future__ import annotations

import logging
import math
from pathlib import Path

import numpy as np
import pandas as pd

from cli.writers import emit, now
from core.errors import ConfigurationError, InfeasibleQuantileError
from resampling.datasets import load_dataset
from resampling.sampling import EfronScheme, draw_sample, draw_weights, regime_label
from resampling.seeding import Seed
from resampling.statcore import Sample, Statistic
from schemas.config import (
    CltConfig,
    CoverageConfig,
    FixedNConfig,
    IntervalConfig,
    NegligibilityConfig,
    WeightsCheckConfig,
)
from studies.cltlab import run_conditioning_study
from studies.diagnostics import (
    efron_moment_oracles,
    fixed_n_consistency_study,
    m_n_decay_study,
    negligibility_report,
    variance_ratio_probe,
)
from studies.executor import ReplicateExecutor
from studies.intervals import (
    StatisticKind,
    bootstrap_quantile,
    bootstrap_replicates,
    check_feasible,
    coverage_experiment,
    quantile_convergence_study,
    two_sided_bound,
)

logger = logging.getLogger(__name__)


def _executor(config) -> ReplicateExecutor:
    return ReplicateExecutor(threads=config.threads)


def _seed(config) -> Seed:
    return Seed(root=config.seed, experiment=config.command)


def _dataset_sample(path: str, csv_header: bool | None) -> Sample:
    sample = Sample.from_values(load_dataset(path, header=csv_header))
    if sample.n < 2:
        raise ConfigurationError(f"dataset {path} needs at least 2 values", field="data")
    sample.require_nondegenerate()
    return sample


# ---------------------------------------------------------------------------
# weights-check
# ---------------------------------------------------------------------------

def cmd_weights_check(config: WeightsCheckConfig) -> list[Path]:
    """M_n decay table, plus the Efron moment oracles at each n."""
    started = now()
    scheme = config.build_scheme()
    seed = _seed(config)
    executor = _executor(config)

    decay = m_n_decay_study(scheme, config.n_grid, config.reps, seed, executor)
    tables = {"": decay}
    if isinstance(scheme, EfronScheme):
        # own label namespace, independent of the decay draws
        moment_seed = seed.for_experiment(f"{config.command}/moments")
        tables["moments"] = pd.concat(
            [
                efron_moment_oracles(n, scheme.m_rule(n), config.reps, moment_seed, executor)
                for n in config.n_grid
            ],
            ignore_index=True,
        )

    return emit(
        config,
        tables,
        started,
        regime=regime_label(scheme),
        degenerate_counts={"weights": int(decay["degenerate_count"].sum())},
    )


# ---------------------------------------------------------------------------
# clt
# ---------------------------------------------------------------------------

def cmd_clt(config: CltConfig) -> list[Path]:
    """Per-realization KS table and a one-row summary."""
    started = now()
    study = run_conditioning_study(config, _executor(config))
    return emit(
        config,
        {"": study.to_frame(), "summary": study.summary_frame()},
        started,
        regime=study.regime,
        degenerate_counts={
            "realizations": study.degenerate_realizations,
            "replicates": study.degenerate_replicates,
        },
    )


# ---------------------------------------------------------------------------
# negligibility
# ---------------------------------------------------------------------------

def cmd_negligibility(config: NegligibilityConfig) -> list[Path]:
    """Lindeberg probe over the epsilon grid, and the variance-ratio deviations.

    One weight vector is drawn and held fixed for both probes.
    """
    started = now()
    scheme = config.build_scheme()
    generator = config.build_generator()
    seed = _seed(config)
    executor = _executor(config)

    w = draw_weights(scheme, config.n, seed.purpose("weights"))
    probe_seed = seed.for_experiment(f"{config.command}/probe")
    report = negligibility_report(
        w, generator, config.epsilon, config.reps, Statistic(config.statistic), probe_seed, executor
    )
    probe = report.to_frame().rename(columns={"probe": "probe_estimate"})
    tables = {"": probe}
    degenerate = {"probe": report.degenerate_count}

    if generator.has_finite_variance:
        ratio_seed = seed.for_experiment(f"{config.command}/ratio")
        ratio = variance_ratio_probe(w, generator, config.reps, ratio_seed, config.sigma_sq, executor)
        row = {"n": config.n, "m": float(w.total_mass), "sigma_sq": ratio.sigma_sq}
        row.update(ratio.quantiles())
        row["mean_ratio"] = float(np.mean(ratio.ratios))
        row["degenerate_count"] = ratio.degenerate_count
        tables["variance"] = pd.DataFrame([row])
        degenerate["variance"] = ratio.degenerate_count
    else:
        logger.info("variance-ratio probe skipped: generator %s has infinite variance", generator.to_spec())

    return emit(config, tables, started, regime=regime_label(scheme), degenerate_counts=degenerate)


# ---------------------------------------------------------------------------
# interval / coverage
# ---------------------------------------------------------------------------

def _dataset_bound_frame(config: IntervalConfig) -> tuple[pd.DataFrame, int]:
    kind = StatisticKind(config.kind)
    scheme = config.build_scheme()
    kind.check_scheme(scheme)
    check_feasible(config.alpha, config.B)
    sample = _dataset_sample(config.data, config.csv_header)

    draws = bootstrap_replicates(sample, scheme, kind, config.B, _seed(config), _executor(config))
    q = bootstrap_quantile(draws.values, config.alpha, kind)
    half_width = sample.std / math.sqrt(sample.n)
    ratios = draws.m_n_ratio[np.isfinite(draws.m_n_ratio)]
    p50, p90, p99 = np.quantile(ratios, [0.5, 0.9, 0.99])

    row = {
        "n": sample.n,
        "mean": sample.mean,
        "sd": sample.std,
        "kind": int(kind),
        "B": q.B,
        "alpha": q.alpha,
        "l": q.l,
        "C": q.value,
        # T_n <= C  <=>  mu >= X_bar - C * S_n / sqrt(n)
        "mu_lower_bound": sample.mean - q.value * half_width,
        "Mn_p50": float(p50),
        "Mn_p90": float(p90),
        "Mn_p99": float(p99),
        "redraws": draws.redraws,
    }
    if config.two_sided:
        # the equal-tailed pair needs a larger B than the one-sided bound; blank it when infeasible
        try:
            lo, hi = two_sided_bound(draws.values, config.alpha, kind)
        except InfeasibleQuantileError as exc:
            logger.warning("two-sided bound skipped: %s", exc)
            row["two_sided_lower"] = row["two_sided_upper"] = math.nan
        else:
            row["two_sided_lower"] = sample.mean - hi.value * half_width
            row["two_sided_upper"] = sample.mean - lo.value * half_width
    return pd.DataFrame([row]), draws.redraws


def cmd_interval(config: IntervalConfig) -> list[Path]:
    """Bound for a CSV dataset, or a coverage run when no dataset is given."""
    started = now()
    if not config.data:
        return _run_coverage(config, started)
    frame, redraws = _dataset_bound_frame(config)
    return emit(
        config,
        {"": frame},
        started,
        regime=regime_label(config.build_scheme()),
        degenerate_counts={"weight_redraws": redraws},
    )


def _run_coverage(config: IntervalConfig | CoverageConfig, started) -> list[Path]:
    scheme = config.build_scheme()
    generator = config.build_generator()
    kind = StatisticKind(config.kind)
    result = coverage_experiment(
        generator, scheme, kind, config.n, config.B, config.alpha, config.reps, _seed(config), _executor(config)
    )
    return emit(
        config,
        {"": result.to_frame()},
        started,
        regime=result.regime,
        degenerate_counts={"weight_redraws": result.redraws},
    )


def cmd_coverage(config: CoverageConfig) -> list[Path]:
    """Coverage at (n, B), or the quantile-convergence table over n_grid."""
    started = now()
    if not config.n_grid:
        return _run_coverage(config, started)
    scheme = config.build_scheme()
    table = quantile_convergence_study(
        config.build_generator(),
        scheme,
        StatisticKind(config.kind),
        [(n, config.B) for n in config.n_grid],
        config.alpha,
        config.reps,
        _seed(config),
        _executor(config),
    )
    return emit(config, {"": table}, started, regime=regime_label(scheme))


# ---------------------------------------------------------------------------
# fixed-n
# ---------------------------------------------------------------------------

def cmd_fixed_n_consistency(config: FixedNConfig) -> list[Path]:
    """One sample held fixed; S*^2 and X*_bar error as m grows."""
    started = now()
    seed = _seed(config)
    if config.data:
        sample = _dataset_sample(config.data, config.csv_header)
    else:
        sample = draw_sample(config.build_generator(), config.n, seed.purpose("data"))
    table = fixed_n_consistency_study(sample, config.m_grid, config.reps, seed, _executor(config))
    return emit(
        config,
        {"": table},
        started,
        regime="n fixed, m -> inf",
        degenerate_counts={"one_point_resamples": int(table["degenerate_count"].sum())},
    )


COMMANDS = {
    "weights-check": cmd_weights_check,
    "clt": cmd_clt,
    "negligibility": cmd_negligibility,
    "interval": cmd_interval,
    "fixed-n": cmd_fixed_n_consistency,
    "coverage": cmd_coverage,
}
