"""
Unit tests for resampling/statcore.py — sample moments, centred weights and
the bootstrapped t-statistics.

The algebraic checks run over randomly drawn small instances: translation
invariance, positive-scale equivariance, sign flip, the pairwise form of
S*^2, and T**_{m_n,S_n} = (S*/S_n) T**.

Run from the project root:
    cd backend
    pytest tests/test_statcore.py -v
"""

import math

import numpy as np
import pytest

from core.errors import (
    DegenerateBootstrapSampleError,
    DegenerateSampleError,
    DegenerateWeightsError,
    InvalidArgumentError,
)
from resampling.sampling import WeightVector
from resampling.statcore import (
    Sample,
    Statistic,
    boot_sample_variance,
    boot_t_batch,
    boot_t_statistics,
    center_weights,
    t_statistic,
)

INSTANCES = 1000


def _random_instance(rng):
    """A non-degenerate (sample, Efron weights) pair with 3 <= n <= 12."""
    while True:
        n = int(rng.integers(3, 13))
        m = int(rng.integers(2, 40))
        x = rng.normal(rng.uniform(-5, 5), rng.uniform(0.1, 10), size=n)
        counts = rng.multinomial(m, np.full(n, 1.0 / n))
        w = WeightVector.from_counts(counts)
        if center_weights(w).is_degenerate or np.count_nonzero(counts) < 2:
            continue
        return Sample.from_values(x), w


# ---------------------------------------------------------------------------
# Hand-computed fixture
# ---------------------------------------------------------------------------

class TestHandComputedCase:
    """X = (0, 1, 2), w = (2, 1, 0), m_n = 3."""

    def test_centred_coefficients(self, hand_weights):
        coeffs = center_weights(hand_weights)
        np.testing.assert_allclose(coeffs.a, [1 / 3, 0.0, -1 / 3], atol=1e-15)
        assert coeffs.v_n_sq == pytest.approx(2 / 9, abs=1e-12)
        assert coeffs.max_a_sq == pytest.approx(1 / 9, abs=1e-12)

    def test_sample_moments(self, hand_sample):
        assert hand_sample.mean == 1.0
        assert hand_sample.variance == pytest.approx(2 / 3, abs=1e-15)

    def test_boot_variance(self, hand_sample, hand_weights):
        assert boot_sample_variance(hand_sample, hand_weights) == pytest.approx(2 / 9, abs=1e-12)

    def test_statistics(self, hand_sample, hand_weights):
        triple = boot_t_statistics(hand_sample, hand_weights)
        assert triple.t_star == pytest.approx(-math.sqrt(3), abs=1e-12)
        assert triple.t_star_star == pytest.approx(-math.sqrt(6), abs=1e-12)
        assert triple.t_star_star_sn == pytest.approx(-math.sqrt(2), abs=1e-12)
        assert triple.boot_var == pytest.approx(2 / 9, abs=1e-12)

    def test_batch_matches_scalar(self, hand_sample, hand_weights):
        batch = boot_t_batch(hand_sample.values, hand_weights.weights, 3)
        assert batch.t_star[0] == pytest.approx(-math.sqrt(3), abs=1e-12)
        assert batch.t_star_star[0] == pytest.approx(-math.sqrt(6), abs=1e-12)
        assert batch.t_star_star_sn[0] == pytest.approx(-math.sqrt(2), abs=1e-12)
        assert batch.m_n_ratio[0] == pytest.approx(0.5, abs=1e-12)


# ---------------------------------------------------------------------------
# Sample / classical T_n
# ---------------------------------------------------------------------------

class TestSample:
    def test_t_statistic(self):
        # X = (1, 2, 3): sqrt(3) * 2 / sqrt(2/3) = 3 sqrt(2)
        assert t_statistic(Sample.from_values([1.0, 2.0, 3.0])) == pytest.approx(3 * math.sqrt(2), abs=1e-12)

    def test_values_are_read_only(self):
        s = Sample.from_values([1.0, 2.0])
        with pytest.raises(ValueError):
            s.values[0] = 5.0

    def test_constant_sample_is_degenerate(self):
        with pytest.raises(DegenerateSampleError):
            t_statistic(Sample.from_values([4.0, 4.0, 4.0]))

    def test_single_observation_has_zero_variance(self):
        s = Sample.from_values([2.0])
        assert s.variance == 0.0
        with pytest.raises(DegenerateSampleError):
            s.require_nondegenerate()

    def test_large_mean_variance_is_accurate(self):
        s = Sample.from_values(1e9 + np.array([0.0, 1.0, 2.0]))
        assert s.variance == pytest.approx(2 / 3, rel=1e-9)

    @pytest.mark.parametrize("values", [[], [1.0, math.nan], [[1.0, 2.0]]])
    def test_invalid_values(self, values):
        with pytest.raises(InvalidArgumentError):
            Sample.from_values(values)


# ---------------------------------------------------------------------------
# Degenerate weights / bootstrap samples
# ---------------------------------------------------------------------------

class TestDegenerateCases:
    def test_uniform_weights_have_zero_v_n(self, hand_sample):
        w = WeightVector.from_counts([1, 1, 1])
        assert center_weights(w).is_degenerate
        with pytest.raises(DegenerateWeightsError):
            boot_t_statistics(hand_sample, w)

    def test_all_mass_on_one_point_leaves_t_star_defined(self, hand_sample):
        w = WeightVector.from_counts([3, 0, 0])
        triple = boot_t_statistics(hand_sample, w)
        assert triple.t_star_star is None
        assert math.isfinite(triple.t_star)
        with pytest.raises(DegenerateBootstrapSampleError):
            triple.value(Statistic.T_STAR_STAR)

    def test_batch_marks_undefined_with_nan(self, hand_sample):
        W = np.array([[1, 1, 1], [3, 0, 0], [2, 1, 0]])
        batch = boot_t_batch(hand_sample.values, W, 3)
        assert np.isnan(batch.t_star[0])
        assert np.isnan(batch.t_star_star[1])
        assert np.isfinite(batch.t_star[1])
        assert np.all(np.isfinite(batch.values(Statistic.T_STAR_STAR)[2:]))

    def test_single_weight_cannot_be_centred(self):
        with pytest.raises(InvalidArgumentError):
            center_weights(WeightVector.from_counts([4]))

    def test_length_mismatch(self, hand_sample):
        with pytest.raises(InvalidArgumentError):
            boot_sample_variance(hand_sample, WeightVector.from_counts([1, 2]))


# ---------------------------------------------------------------------------
# Algebraic invariants over random instances
# ---------------------------------------------------------------------------

def _assert_triples_match(a, b, sign=1.0):
    """Every field of b equals sign * the same field of a."""
    assert b.t_star == pytest.approx(sign * a.t_star, rel=1e-8, abs=1e-8)
    assert b.t_star_star_sn == pytest.approx(sign * a.t_star_star_sn, rel=1e-8, abs=1e-8)
    assert (b.t_star_star is None) == (a.t_star_star is None)
    if a.t_star_star is not None:
        assert b.t_star_star == pytest.approx(sign * a.t_star_star, rel=1e-8, abs=1e-8)


class TestAlgebraicInvariants:
    """Properties of the statistics that hold exactly for every instance."""

    def test_translation_invariance(self, rng):
        for _ in range(INSTANCES):
            s, w = _random_instance(rng)
            shift = rng.uniform(-100, 100)
            a = boot_t_statistics(s, w)
            b = boot_t_statistics(Sample.from_values(s.values + shift), w)
            _assert_triples_match(a, b)
            assert b.boot_var == pytest.approx(a.boot_var, rel=1e-8, abs=1e-10)

    def test_positive_scale_equivariance(self, rng):
        for _ in range(INSTANCES):
            s, w = _random_instance(rng)
            c = rng.uniform(0.01, 100)
            scaled = Sample.from_values(c * s.values)
            a = boot_t_statistics(s, w)
            b = boot_t_statistics(scaled, w)
            _assert_triples_match(a, b)
            assert t_statistic(scaled) == pytest.approx(t_statistic(s), rel=1e-8, abs=1e-8)
            assert b.boot_var == pytest.approx(c * c * a.boot_var, rel=1e-8, abs=1e-12)

    def test_sign_flip(self, rng):
        for _ in range(INSTANCES):
            s, w = _random_instance(rng)
            flipped = Sample.from_values(-s.values)
            a = boot_t_statistics(s, w)
            b = boot_t_statistics(flipped, w)
            _assert_triples_match(a, b, sign=-1.0)
            assert t_statistic(flipped) == pytest.approx(-t_statistic(s), rel=1e-8, abs=1e-8)
            assert b.boot_var == pytest.approx(a.boot_var, rel=1e-8, abs=1e-12)

    def test_boot_variance_pairwise_form(self, rng):
        # S*^2 = (1 / (2 m^2)) sum_i sum_j w_i w_j (X_i - X_j)^2
        for _ in range(INSTANCES):
            s, w = _random_instance(rng)
            x = s.values
            wf = w.weights.astype(float)
            pairwise = np.sum(np.outer(wf, wf) * (x[:, None] - x[None, :]) ** 2) / (2.0 * w.total_mass**2)
            assert boot_sample_variance(s, w) == pytest.approx(pairwise, rel=1e-8, abs=1e-12)

    def test_sn_variant_is_rescaled_t_star_star(self, rng):
        for _ in range(INSTANCES):
            s, w = _random_instance(rng)
            t = boot_t_statistics(s, w)
            if t.t_star_star is None:
                continue
            expected = math.sqrt(t.boot_var) / s.std * t.t_star_star
            assert t.t_star_star_sn == pytest.approx(expected, rel=1e-8, abs=1e-10)

    def test_coefficients_sum_to_zero(self, rng):
        for _ in range(INSTANCES):
            _, w = _random_instance(rng)
            assert abs(center_weights(w).a.sum()) < 1e-12

    def test_batch_rows_match_scalar_path(self, rng):
        for _ in range(200):
            s, w = _random_instance(rng)
            t = boot_t_statistics(s, w)
            batch = boot_t_batch(s.values, w.weights, w.total_mass)
            assert batch.t_star[0] == pytest.approx(t.t_star, rel=1e-10, abs=1e-12)
            assert batch.t_star_star_sn[0] == pytest.approx(t.t_star_star_sn, rel=1e-10, abs=1e-12)

    def test_batch_row_independent_of_batch_mates(self, rng):
        s, _ = _random_instance(rng)
        n = s.n
        W = rng.multinomial(3 * n, np.full(n, 1.0 / n), size=20)
        full = boot_t_batch(s.values, W, 3 * n).t_star_star_sn
        alone = boot_t_batch(s.values, W[7], 3 * n).t_star_star_sn
        assert full[7] == alone[0]
