"""Simulation lab for a worst-case generalization gap of uniformly stable learners.

The package instantiates an explicit hard case (domain, distribution,
majority-vote learning rule, l1 loss), certifies its stability coefficient
and loss bound numerically, verifies the anti-concentration facts behind
it exactly, and Monte-Carlo-estimates the probability that the
generalization gap clears gamma/4 + l/(32*sqrt(n)), which is at least
3/64 for every valid (gamma, l, n).
"""

from .anticoncentration import (
    DiscreteDistribution,
    MomentCheck,
    MonteCarloTail,
    PaleyZygmundCheck,
    RADEMACHER_TAIL_BOUND,
    TailReport,
    paley_zygmund_bound,
    rademacher_moment_check,
    rademacher_tail_exact,
    rademacher_tail_montecarlo,
    random_distribution,
    verify_paley_zygmund,
)
from .certify import (
    LearningRule,
    StabilityCertificate,
    StabilityWitness,
    certify_boundedness,
    certify_stability_exhaustive,
    certify_stability_random,
    constant_rule,
    evaluate_replacement,
    loss_upper_bound,
    majority_vote_rule,
    replace_one,
)
from .construction import (
    ConstructionParams,
    Instance,
    LabeledExample,
    Prediction,
    TrainingSet,
    coordinate_sign,
    loss,
    predict,
    sample_instance,
    sample_training_set,
    scale_factor,
    scale_factor_sum,
)
from .errors import GuardExceededError, InvariantViolationError
from .experiment import (
    ExperimentReport,
    FrequencyEstimate,
    PROBABILITY_FLOOR,
    ReferenceBounds,
    TrialResult,
    UpperBoundQuery,
    detect_e1,
    detect_e2,
    distinct_index_probability,
    estimate_probabilities,
    run_trial,
    trial_rng,
    upper_bound_reference,
)
from .risk import (
    RiskBreakdown,
    empirical_risk,
    gap_threshold,
    generalization_gap,
    population_risk_bruteforce,
    population_risk_closed,
)

__version__ = "0.1.0"
