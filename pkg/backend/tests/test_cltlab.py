"""
Tests for studies/cltlab.py — conditional laws of the bootstrapped
t-statistics under both conditioning paradigms.

The slow classes run the Monte Carlo acceptance shapes (11 fixed
realizations x 2000 conditional replicates each).

Run from the project root:
    cd backend
    pytest tests/test_cltlab.py -v -m "not slow"
"""

import numpy as np
import pytest

from core.errors import (
    ConfigurationError,
    DegenerateSampleError,
    DegenerateWeightsError,
    ExperimentError,
    InvalidArgumentError,
    UnsupportedModeError,
)
from resampling.sampling import (
    DataGenerator,
    EfronScheme,
    IidPositiveScheme,
    MRule,
    PositiveLaw,
    WeightVector,
    draw_efron_weights,
    draw_iid_positive_weights,
    draw_sample,
)
from resampling.statcore import Sample, Statistic
from schemas.config import CltConfig
from studies.cltlab import (
    EmpiricalDistribution,
    Paradigm,
    check_regime,
    conditional_on_data,
    conditional_on_weights,
    run_conditioning_study,
    unconditional_distribution,
)
from studies.executor import ReplicateExecutor


# ---------------------------------------------------------------------------
# EmpiricalDistribution
# ---------------------------------------------------------------------------

class TestEmpiricalDistribution:
    def test_nan_replicates_are_counted_and_dropped(self):
        dist = EmpiricalDistribution.from_replicates(np.array([0.5, np.nan, -0.5, 0.0]))
        np.testing.assert_array_equal(dist.values, [-0.5, 0.0, 0.5])
        assert dist.degenerate_count == 1
        assert dist.R == 4

    def test_all_degenerate_is_an_experiment_error(self):
        with pytest.raises(ExperimentError):
            EmpiricalDistribution.from_replicates(np.full(10, np.nan))


# ---------------------------------------------------------------------------
# check_regime
# ---------------------------------------------------------------------------

class TestCheckRegime:
    """check_regime(paradigm, scheme, statistic) -> regime label, or raises."""

    def test_on_data_requires_efron(self):
        with pytest.raises(UnsupportedModeError):
            check_regime(Paradigm.ON_DATA, IidPositiveScheme(), Statistic.T_STAR_STAR)

    def test_on_data_rejects_t_star(self):
        with pytest.raises(UnsupportedModeError):
            check_regime(Paradigm.ON_DATA, EfronScheme(MRule("nlogn", 4)), Statistic.T_STAR)

    def test_on_weights_rejects_sn_variant(self):
        with pytest.raises(UnsupportedModeError):
            check_regime(Paradigm.ON_WEIGHTS, EfronScheme(MRule("ratio", 1)), Statistic.T_STAR_STAR_SN)

    def test_t_star_star_on_weights_needs_n_little_o_m(self):
        with pytest.raises(ConfigurationError) as exc_info:
            check_regime(Paradigm.ON_WEIGHTS, EfronScheme(MRule("ratio", 1)), Statistic.T_STAR_STAR)
        assert "n=o(m_n)" in str(exc_info.value)
        assert exc_info.value.field == "m_rule"

    def test_t_star_star_on_data_with_ratio_rule_rejected(self):
        with pytest.raises(ConfigurationError):
            check_regime(Paradigm.ON_DATA, EfronScheme(MRule("ratio", 1)), Statistic.T_STAR_STAR)

    def test_valid_combinations_return_labels(self):
        assert check_regime(Paradigm.ON_DATA, EfronScheme(MRule("nlogn", 4)), Statistic.T_STAR_STAR) == (
            "m/(2n log n)->inf"
        )
        assert check_regime(Paradigm.ON_DATA, EfronScheme(MRule("ratio", 1)), Statistic.T_STAR_STAR_SN) == (
            "m/n>=eps, m=o(n^2)"
        )
        assert check_regime(Paradigm.ON_WEIGHTS, IidPositiveScheme(), Statistic.T_STAR).startswith("iid-positive")


# ---------------------------------------------------------------------------
# conditional_on_weights / conditional_on_data
# ---------------------------------------------------------------------------

class TestConditionalOnWeights:
    """conditional_on_weights(w, generator, statistic, R, seed) -> EmpiricalDistribution."""

    @pytest.fixture
    def weights(self, seed):
        return draw_efron_weights(50, 50, seed.purpose("weights"))

    def test_shape_and_order(self, weights, seed):
        dist = conditional_on_weights(weights, DataGenerator.parse("normal"), Statistic.T_STAR, 500, seed)
        assert dist.R == 500
        assert dist.values.size == 500
        assert np.all(np.diff(dist.values) >= 0)
        assert 0.0 <= dist.ks_to_normal <= 1.0

    def test_thread_count_has_no_effect(self, weights, seed):
        g = DataGenerator.parse("exp-centered")
        a = conditional_on_weights(weights, g, Statistic.T_STAR, 750, seed, ReplicateExecutor(threads=1))
        b = conditional_on_weights(weights, g, Statistic.T_STAR, 750, seed, ReplicateExecutor(threads=4))
        np.testing.assert_array_equal(a.values, b.values)
        assert a.ks_to_normal == b.ks_to_normal

    def test_affine_data_leaves_ks_unchanged(self, weights, seed):
        g = DataGenerator.parse("exp-centered")
        a = conditional_on_weights(weights, g, Statistic.T_STAR, 500, seed)
        b = conditional_on_weights(weights, g.affine(3.0, 7.0), Statistic.T_STAR, 500, seed)
        np.testing.assert_allclose(b.values, a.values, rtol=1e-9, atol=1e-9)
        assert b.ks_to_normal == pytest.approx(a.ks_to_normal, abs=1e-9)

    def test_too_few_replicates(self, weights, seed):
        with pytest.raises(InvalidArgumentError):
            conditional_on_weights(weights, DataGenerator.parse("normal"), Statistic.T_STAR, 100, seed)

    def test_degenerate_weights(self, seed):
        with pytest.raises(DegenerateWeightsError):
            conditional_on_weights(
                WeightVector.from_counts([1] * 10), DataGenerator.parse("normal"), Statistic.T_STAR, 500, seed
            )


class TestConditionalOnData:
    """conditional_on_data(s, scheme, statistic, R, seed) -> EmpiricalDistribution."""

    def test_reproducible(self, seed):
        s = draw_sample(DataGenerator.parse("normal"), 40, seed.purpose("data"))
        scheme = EfronScheme(MRule("nlogn", 4))
        a = conditional_on_data(s, scheme, Statistic.T_STAR_STAR, 500, seed)
        b = conditional_on_data(s, scheme, Statistic.T_STAR_STAR, 500, seed)
        np.testing.assert_array_equal(a.values, b.values)

    def test_non_efron_scheme_unsupported(self, seed, hand_sample):
        with pytest.raises(UnsupportedModeError):
            conditional_on_data(hand_sample, IidPositiveScheme(), Statistic.T_STAR_STAR, 500, seed)

    def test_constant_sample(self, seed):
        with pytest.raises(DegenerateSampleError):
            conditional_on_data(
                Sample.from_values([2.0] * 10), EfronScheme(MRule("ratio", 1)), Statistic.T_STAR_STAR_SN, 500, seed
            )

    def test_tiny_m_produces_counted_degeneracies(self, seed):
        # m = 2 with n = 30: the two draws often land on the same point (S*^2 = 0)
        s = draw_sample(DataGenerator.parse("normal"), 30, seed.purpose("data"))
        dist = conditional_on_data(s, EfronScheme(MRule("fixed", 2)), Statistic.T_STAR_STAR, 600, seed)
        assert dist.degenerate_count > 0
        assert dist.values.size + dist.degenerate_count == 600


class TestUnconditional:
    def test_classical_baseline_is_close_to_normal(self, seed):
        dist = unconditional_distribution(DataGenerator.parse("normal"), None, Statistic.CLASSICAL, 50, 2000, seed)
        assert dist.ks_to_normal < 0.05

    def test_classical_baseline_centres_at_known_mean(self, seed):
        dist = unconditional_distribution(DataGenerator.parse("normal:5,2"), None, Statistic.CLASSICAL, 50, 2000, seed)
        assert dist.ks_to_normal < 0.05

    def test_bootstrap_statistic_needs_scheme(self, seed):
        with pytest.raises(ConfigurationError):
            unconditional_distribution(DataGenerator.parse("normal"), None, Statistic.T_STAR, 50, 500, seed)

    def test_paired_with_conditional_labels(self, seed):
        g = DataGenerator.parse("normal")
        scheme = EfronScheme(MRule("ratio", 1))
        dist = unconditional_distribution(g, scheme, Statistic.T_STAR, 20, 500, seed)
        assert dist.values.size + dist.degenerate_count == 500


# ---------------------------------------------------------------------------
# run_conditioning_study
# ---------------------------------------------------------------------------

class TestRunConditioningStudy:
    def test_small_study_summary(self):
        config = CltConfig(paradigm="on-weights", statistic="t_star", n=40, outer_reps=3, inner_reps=500, seed=9)
        study = run_conditioning_study(config)
        assert len(study.realizations) == 3
        assert study.degenerate_realizations == 0
        frame = study.summary_frame()
        assert frame.loc[0, "median_ks"] == pytest.approx(np.median(study.per_realization_ks))
        assert list(study.to_frame().columns) == ["realization", "ks", "degenerate_count", "m_n", "Mn", "sample_sd"]

    def test_inconsistent_regime_rejected(self):
        config = CltConfig(paradigm="on-data", statistic="t_star_star", m_rule="ratio:1", n=40)
        with pytest.raises(ConfigurationError):
            run_conditioning_study(config)

    def test_on_data_with_gamma_scheme_rejected(self):
        config = CltConfig(paradigm="on-data", statistic="t_star_star_sn", scheme="gamma", n=40)
        with pytest.raises(UnsupportedModeError):
            run_conditioning_study(config)

    def test_single_degenerate_realization_is_experiment_error(self):
        # two-point data with n = 2 and P(high) tiny: the one fixed sample is constant
        config = CltConfig(
            paradigm="on-data",
            statistic="t_star_star_sn",
            generator="two-point:0,1,0.000001",
            n=2,
            outer_reps=1,
            inner_reps=500,
        )
        with pytest.raises(ExperimentError):
            run_conditioning_study(config)


@pytest.mark.slow
class TestConditioningAcceptance:
    """Median KS over 11 fixed realizations, R = 2000 each."""

    def test_t_star_on_efron_weights(self):
        config = CltConfig(
            paradigm="on-weights", statistic="t_star", m_rule="ratio:1",
            generator="exp-centered", n=500, outer_reps=11, inner_reps=2000, seed=101,
        )
        assert run_conditioning_study(config).median_ks <= 0.05

    def test_t_star_star_on_efron_weights(self):
        config = CltConfig(
            paradigm="on-weights", statistic="t_star_star", m_rule="big-ratio:10",
            generator="exp-centered", n=500, outer_reps=11, inner_reps=2000, seed=102,
        )
        assert run_conditioning_study(config).median_ks <= 0.06

    def test_t_star_star_on_normal_data(self):
        config = CltConfig(
            paradigm="on-data", statistic="t_star_star", m_rule="nlogn:4",
            generator="normal", n=200, outer_reps=11, inner_reps=2000, seed=103,
        )
        assert run_conditioning_study(config).median_ks <= 0.06

    def test_sn_variant_on_t2_data(self):
        config = CltConfig(
            paradigm="on-data", statistic="t_star_star_sn", m_rule="ratio:1",
            generator="t:2", n=2000, outer_reps=11, inner_reps=2000, seed=104,
        )
        assert run_conditioning_study(config).median_ks <= 0.08


@pytest.mark.slow
class TestDistributionAcceptance:
    """Single-realization and unconditional laws, R = 2000."""

    def test_t_star_on_gamma_weights(self, seed):
        w = draw_iid_positive_weights(1000, PositiveLaw("gamma", 4.0, 1.0), seed.purpose("weights"))
        dist = conditional_on_weights(w, DataGenerator.parse("normal"), Statistic.T_STAR, 2000, seed)
        assert dist.ks_to_normal <= 0.05

    def test_unconditional_t_star(self, seed):
        dist = unconditional_distribution(
            DataGenerator.parse("normal"), EfronScheme(MRule("ratio", 1)), Statistic.T_STAR, 500, 2000, seed
        )
        assert dist.ks_to_normal <= 0.05

    def test_classical_on_t2_data(self, seed):
        # t(2) lies in the normal domain of attraction, so T_n is asymptotically normal
        dist = unconditional_distribution(DataGenerator.parse("t:2"), None, Statistic.CLASSICAL, 5000, 2000, seed)
        assert dist.ks_to_normal <= 0.06

    def test_more_inner_replicates_do_not_raise_median_ks(self):
        base = dict(
            paradigm="on-weights", statistic="t_star", m_rule="ratio:1",
            generator="normal", n=200, outer_reps=11, seed=105,
        )
        coarse = run_conditioning_study(CltConfig(**base, inner_reps=500))
        fine = run_conditioning_study(CltConfig(**base, inner_reps=2000))
        assert fine.median_ks <= coarse.median_ks
