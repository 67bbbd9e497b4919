"""Population risk, empirical risk and the generalization gap of the hard case.

The population risk of the majority-vote rule on this construction is the
same for every training set: the output at a coordinate always lies on the
segment between the two labels of that coordinate, so the two losses of a
+- pair sum to 2*lmax*sigma(i) and averaging over the uniform domain gives
exactly 3*lmax/2.  The closed form is used by the main pipeline; a
brute-force expectation over the full finite support exists as an
independent oracle for enumerable sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .construction import ConstructionParams, TrainingSet
from .errors import GuardExceededError

# Largest support size 2*d the brute-force expectation will enumerate.
ENUMERATION_LIMIT = 10**7


@dataclass(frozen=True)
class RiskBreakdown:
    population: float
    empirical: float
    gap: float


def population_risk_closed(params: ConstructionParams) -> float:
    """Exact population risk 3*lmax/2, independent of the training set."""
    return 1.5 * params.lmax


def population_risk_bruteforce(train: TrainingSet, params: ConstructionParams) -> float:
    """Expected loss by direct enumeration of the whole 2*d-point support.

    Exists to cross-validate the closed form at small n; raises
    GuardExceededError when 2*d exceeds ENUMERATION_LIMIT (callers fall
    back to :func:`population_risk_closed`).
    """
    d = params.d
    if 2 * d > ENUMERATION_LIMIT:
        raise GuardExceededError(
            f"support of size 2*d = {2 * d} is too large to enumerate "
            f"(limit {ENUMERATION_LIMIT}); use population_risk_closed"
        )
    signed_counts = np.bincount(
        train.index_array, weights=train.sign_array, minlength=d + 1
    )[1:]
    sign_hat = np.where(signed_counts >= 0, 1.0, -1.0)
    sigma = 1.0 + (np.arange(1, d + 1) > params.half_d)
    loss_pos = sigma * np.abs(sign_hat * params.g - params.lmax)
    loss_neg = sigma * np.abs(sign_hat * params.g + params.lmax)
    return float((loss_pos + loss_neg).sum() / (2 * d))


def empirical_risk(train: TrainingSet, params: ConstructionParams) -> float:
    """Mean training loss of the majority-vote rule on its own sample.

    The per-sample loss is sigma_i*(lmax - g) when the predicted sign
    agrees with the sample's sign and sigma_i*(lmax + g) otherwise.  The
    two integer scale-factor masses are accumulated exactly and scaled
    once, so on samples with pairwise-distinct indices (where every sample
    agrees with its own vote) the result is bit-identical to
    ((lmax - g) * scale_factor_sum) / n.
    """
    n = len(train)
    if n == 0:
        raise ValueError("empirical risk of an empty training set is undefined")
    idx = train.index_array
    sgn = train.sign_array
    uniq, inverse = np.unique(idx, return_inverse=True)
    signed_counts = np.bincount(inverse, weights=sgn)
    sign_hat = np.where(signed_counts >= 0, 1, -1)[inverse]
    sigma = 1 + (idx > params.half_d)
    agree_mass = int(sigma[sign_hat == sgn].sum())
    disagree_mass = int(sigma.sum()) - agree_mass
    return (
        (params.lmax - params.g) * agree_mass + (params.lmax + params.g) * disagree_mass
    ) / n


def generalization_gap(train: TrainingSet, params: ConstructionParams) -> RiskBreakdown:
    """Closed-form population risk, empirical risk, and their difference."""
    population = population_risk_closed(params)
    empirical = empirical_risk(train, params)
    return RiskBreakdown(population=population, empirical=empirical, gap=population - empirical)


def gap_threshold(params: ConstructionParams) -> float:
    """Gap-event threshold gamma/4 + l/(32*sqrt(n)) in target units.

    By construction this equals g + lmax/(8*sqrt(n)); the target-unit form
    is the one the trial pipeline compares against.
    """
    return params.gamma_target / 4.0 + params.l_target / (32.0 * math.sqrt(params.n))
