"""Population risk, empirical risk and the gap, checked against oracles."""

import math

import numpy as np
import pytest

from helpers import dense_empirical_risk, distinct_training_set, random_training_set
from stability_lab import (
    ConstructionParams,
    GuardExceededError,
    TrainingSet,
    empirical_risk,
    gap_threshold,
    generalization_gap,
    population_risk_bruteforce,
    population_risk_closed,
    scale_factor_sum,
)

PARAMS_N2 = ConstructionParams.from_targets(2, 4.0, 16.0)  # g=1, lmax=4, d=16


class TestPopulationRisk:
    def test_closed_form_values(self):
        assert population_risk_closed(PARAMS_N2) == 6.0
        assert population_risk_closed(ConstructionParams.from_targets(1, 4.0, 4.0)) == 1.5

    def test_bruteforce_small_case(self):
        # n=1, d=4: the expectation enumerates all 8 instances directly.
        params = ConstructionParams.from_targets(1, 4.0, 4.0)
        train = TrainingSet(indices=(1,), signs=(1,))
        assert population_risk_bruteforce(train, params) == pytest.approx(1.5, rel=1e-9)

    def test_bruteforce_agrees_with_closed_form(self):
        rng = np.random.default_rng(31)
        for n in (1, 2, 3):
            params = ConstructionParams.from_targets(n, 1.0, 3.0)
            closed = population_risk_closed(params)
            for _ in range(100):
                train = random_training_set(params, rng)
                brute = population_risk_bruteforce(train, params)
                assert abs(brute - closed) <= 1e-9 * closed

    def test_bruteforce_sign_flip_invariant(self):
        rng = np.random.default_rng(32)
        for _ in range(20):
            train = random_training_set(PARAMS_N2, rng)
            flipped = TrainingSet(
                indices=train.indices, signs=tuple(-s for s in train.signs)
            )
            assert population_risk_bruteforce(train, PARAMS_N2) == population_risk_bruteforce(
                flipped, PARAMS_N2
            )

    def test_bruteforce_guard(self):
        params = ConstructionParams.from_targets(1200, 1.0, 1.0)  # 2d > 10^7
        train = TrainingSet(indices=(1,) * 1200, signs=(1,) * 1200)
        with pytest.raises(GuardExceededError, match="closed"):
            population_risk_bruteforce(train, params)


class TestEmpiricalRisk:
    def test_distinct_indices_example(self):
        train = TrainingSet(indices=(3, 10), signs=(1, -1))
        value = empirical_risk(train, PARAMS_N2)
        assert value == 4.5  # (lmax - g)/n * (sigma 1 + sigma 2) = 1.5 * 3
        assert value == dense_empirical_risk(train, PARAMS_N2)

    def test_duplicate_index_with_cancellation(self):
        # Both samples sit on coordinate 3 (scale 1) with opposite signs, so
        # the vote ties to +1: losses are 1*(4-1)=3 and 1*(4+1)=5, mean 4.0.
        train = TrainingSet(indices=(3, 3), signs=(1, -1))
        value = empirical_risk(train, PARAMS_N2)
        assert value == 4.0
        assert value == dense_empirical_risk(train, PARAMS_N2)

    def test_gamma_equal_l_gives_zero_on_distinct(self):
        params = ConstructionParams.from_targets(2, 16.0, 16.0)  # g == lmax
        train = TrainingSet(indices=(3, 10), signs=(1, -1))
        assert empirical_risk(train, params) == 0.0

    def test_matches_per_sample_dense_oracle(self):
        rng = np.random.default_rng(33)
        for n in (1, 2, 3, 5):
            params = ConstructionParams.from_targets(n, 1.0, 3.0)
            for _ in range(50):
                train = random_training_set(params, rng)
                assert empirical_risk(train, params) == pytest.approx(
                    dense_empirical_risk(train, params), rel=1e-12
                )

    def test_distinct_closed_form_is_bit_exact(self):
        rng = np.random.default_rng(34)
        for n in (1, 2, 5, 20):
            params = ConstructionParams.from_targets(n, 0.7, 2.3)
            for _ in range(50):
                train = distinct_training_set(params, rng)
                sigma_sum = scale_factor_sum(train, params)
                expected = (params.lmax - params.g) * sigma_sum / n
                assert empirical_risk(train, params) == expected

    def test_empty_training_set_rejected(self):
        with pytest.raises(ValueError):
            empirical_risk(TrainingSet(indices=(), signs=()), PARAMS_N2)


class TestGap:
    def test_breakdown_example(self):
        train = TrainingSet(indices=(3, 10), signs=(1, -1))
        breakdown = generalization_gap(train, PARAMS_N2)
        assert breakdown.population == 6.0
        assert breakdown.empirical == 4.5
        assert breakdown.gap == 1.5

    def test_example_gap_clears_threshold(self):
        train = TrainingSet(indices=(3, 10), signs=(1, -1))
        breakdown = generalization_gap(train, PARAMS_N2)
        threshold = PARAMS_N2.g + PARAMS_N2.lmax / (8.0 * math.sqrt(PARAMS_N2.n))
        assert threshold == pytest.approx(1.3535533905932737, rel=1e-12)
        assert breakdown.gap > threshold

    def test_threshold_units_agree(self):
        # gamma/4 + l/(32*sqrt(n)) and g + lmax/(8*sqrt(n)) are the same
        # number up to rounding.
        for n in (1, 2, 16, 256):
            params = ConstructionParams.from_targets(n, 0.3, 1.7)
            target_units = gap_threshold(params)
            construction_units = params.g + params.lmax / (8.0 * math.sqrt(n))
            assert target_units == pytest.approx(construction_units, rel=1e-12)

    def test_gap_is_population_minus_empirical_exactly(self):
        rng = np.random.default_rng(35)
        for _ in range(50):
            train = random_training_set(PARAMS_N2, rng)
            breakdown = generalization_gap(train, PARAMS_N2)
            assert breakdown.gap == breakdown.population - breakdown.empirical

    def test_gap_can_be_negative_for_small_gamma(self):
        # Distinct samples that both land on scale-2 coordinates: the gap
        # collapses to 2g - lmax/2, negative whenever g < lmax/4.
        params = ConstructionParams.from_targets(2, 1.0, 16.0)  # g=0.25, lmax=4
        train = TrainingSet(indices=(9, 10), signs=(1, -1))
        breakdown = generalization_gap(train, params)
        expected = 2.0 * params.g - params.lmax / 2.0
        assert breakdown.gap == pytest.approx(expected, rel=1e-12)
        assert breakdown.gap < 0.0
