"""Shared independent oracles for the test suite.

The dense oracle materializes actual length-d vectors and measures l1
distances directly, which the library never does; it is the ground truth
the sparse closed forms are checked against (small d only).
"""

from __future__ import annotations

import numpy as np

from stability_lab import (
    ConstructionParams,
    Instance,
    Prediction,
    TrainingSet,
    predict,
    scale_factor,
)


def dense_vector(index: int, sign: int, magnitude: float, params: ConstructionParams) -> np.ndarray:
    vec = np.zeros(params.d)
    vec[index - 1] = sign * magnitude * scale_factor(index, params)
    return vec


def dense_prediction_vector(pred: Prediction, params: ConstructionParams) -> np.ndarray:
    return dense_vector(pred.index, pred.sign_hat, params.g, params)


def dense_label_vector(y: Instance, params: ConstructionParams) -> np.ndarray:
    return dense_vector(y.index, y.sign, params.lmax, params)


def dense_l1_loss(pred: Prediction, y: Instance, params: ConstructionParams) -> float:
    diff = dense_prediction_vector(pred, params) - dense_label_vector(y, params)
    return float(np.abs(diff).sum())


def dense_empirical_risk(train: TrainingSet, params: ConstructionParams) -> float:
    total = 0.0
    for example in train.examples:
        total += dense_l1_loss(predict(train, example.x, params), example.y, params)
    return total / len(train)


def random_training_set(params: ConstructionParams, rng: np.random.Generator) -> TrainingSet:
    indices = tuple(int(v) for v in rng.integers(1, params.d + 1, size=params.n))
    signs = tuple(int(v) for v in 2 * rng.integers(0, 2, size=params.n) - 1)
    return TrainingSet(indices=indices, signs=signs)


def distinct_training_set(params: ConstructionParams, rng: np.random.Generator) -> TrainingSet:
    indices = rng.choice(np.arange(1, params.d + 1), size=params.n, replace=False)
    signs = 2 * rng.integers(0, 2, size=params.n) - 1
    return TrainingSet(
        indices=tuple(int(v) for v in indices), signs=tuple(int(v) for v in signs)
    )
