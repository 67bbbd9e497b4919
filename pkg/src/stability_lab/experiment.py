"""Seeded Monte Carlo trials of the full lower-bound pipeline.

A trial draws a training set, computes the generalization gap, and flags
three events: E1 (all sample indices pairwise distinct), E2 (scale-1
samples outnumber scale-2 samples by strictly more than sqrt(n)/2), and
the gap event {gap >= gamma/4 + l/(32*sqrt(n))}.  The deterministic core
of the construction is that E1 and E2 together force the gap event; this
implication is asserted on every single trial and a violation is a hard
error carrying the trial seed.

Aggregation is reproducible by construction: trial k is driven by a
generator seeded from SeedSequence(master_seed, spawn_key=(k,)), trials
are grouped into fixed-size chunks independent of the worker count, and
chunks are reduced in index order with integer event counters, so both the
counters and the float gap mean are identical for any scheduling.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .construction import (
    ConstructionParams,
    TrainingSet,
    sample_training_set,
    scale_factor_sum,
)
from .errors import InvariantViolationError
from .risk import gap_threshold, generalization_gap

GAP_EVENT_TOLERANCE = 1e-12
PROBABILITY_FLOOR = 3.0 / 64.0
E2_PROBABILITY_FLOOR = 3.0 / 32.0
E1_GIVEN_E2_FLOOR = 0.5
CHUNK_SIZE = 4096
WORKER_ENV_VAR = "STABILITY_LAB_THREADS"


@dataclass(frozen=True)
class TrialResult:
    gap: float
    e1: bool
    e2: bool
    gap_event: bool
    sigma_sum: int


def detect_e1(train: TrainingSet) -> bool:
    """True iff all sample indices are pairwise distinct (signs irrelevant)."""
    return len(set(train.indices)) == len(train)


def detect_e2(train: TrainingSet, params: ConstructionParams) -> bool:
    """True iff scale-1 samples exceed scale-2 samples by more than sqrt(n)/2.

    With margin m = #(scale 1) - #(scale 2), the strict comparison
    m > sqrt(n)/2 is decided in integers as (m > 0 and 4*m^2 > n).
    """
    n = len(train)
    count_short = int((train.index_array <= params.half_d).sum())
    margin = 2 * count_short - n
    return margin > 0 and 4 * margin * margin > n


def run_trial(
    params: ConstructionParams,
    rng: np.random.Generator,
    trial_seed: object | None = None,
) -> TrialResult:
    """One full pipeline pass: sample, score, flag events, assert the core.

    `trial_seed` is echoed into the error message should the per-trial
    implication (E1 and E2 imply the gap event) ever fail.
    """
    train = sample_training_set(params, rng)
    breakdown = generalization_gap(train, params)
    e1 = detect_e1(train)
    e2 = detect_e2(train, params)
    threshold = gap_threshold(params)
    gap_event = breakdown.gap >= threshold - GAP_EVENT_TOLERANCE
    if e1 and e2 and not gap_event:
        raise InvariantViolationError(
            "E1 and E2 hold but the gap event failed: "
            f"gap={breakdown.gap!r} < threshold={threshold!r} "
            f"(n={params.n}, gamma={params.gamma_target}, l={params.l_target}, "
            f"trial_seed={trial_seed!r})"
        )
    return TrialResult(
        gap=breakdown.gap,
        e1=e1,
        e2=e2,
        gap_event=gap_event,
        sigma_sum=scale_factor_sum(train, params),
    )


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """The generator that drives trial `trial_index` of a run.

    SeedSequence mixing makes the stream a fixed function of
    (master_seed, trial_index), independent of any scheduling.
    """
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(trial_index,))
    )


@dataclass(frozen=True)
class FrequencyEstimate:
    """An event frequency with its binomial standard error and a 5-sigma
    normal-approximation interval (a pragmatic test margin, not a claim)."""

    count: int
    total: int
    freq: float
    stderr: float
    ci_lo: float
    ci_hi: float


def _frequency(count: int, total: int) -> FrequencyEstimate:
    if total <= 0:
        return FrequencyEstimate(count=0, total=0, freq=0.0, stderr=0.0, ci_lo=0.0, ci_hi=0.0)
    freq = count / total
    stderr = math.sqrt(freq * (1.0 - freq) / total)
    return FrequencyEstimate(
        count=count,
        total=total,
        freq=freq,
        stderr=stderr,
        ci_lo=max(0.0, freq - 5.0 * stderr),
        ci_hi=min(1.0, freq + 5.0 * stderr),
    )


@dataclass(frozen=True)
class ExperimentReport:
    params: ConstructionParams
    trials: int
    master_seed: int
    gap_event: FrequencyEstimate
    e1: FrequencyEstimate
    e2: FrequencyEstimate
    e1_and_e2: FrequencyEstimate
    e1_given_e2: FrequencyEstimate
    mean_gap: float
    threshold: float


def resolve_worker_count(requested: int | None = None) -> int:
    """Worker count: requested or machine parallelism, capped by the
    STABILITY_LAB_THREADS environment variable."""
    workers = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get(WORKER_ENV_VAR)
    if cap is not None:
        try:
            cap_value = int(cap)
        except ValueError as exc:
            raise ValueError(f"{WORKER_ENV_VAR} must be an integer, got {cap!r}") from exc
        if cap_value < 1:
            raise ValueError(f"{WORKER_ENV_VAR} must be >= 1, got {cap_value}")
        workers = min(workers, cap_value)
    return max(1, workers)


def _run_chunk(
    params: ConstructionParams, master_seed: int, start: int, stop: int
) -> tuple[int, int, int, int, float]:
    count_gap = count_e1 = count_e2 = count_both = 0
    gap_sum = 0.0
    for k in range(start, stop):
        result = run_trial(params, trial_rng(master_seed, k), trial_seed=(master_seed, k))
        count_gap += result.gap_event
        count_e1 += result.e1
        count_e2 += result.e2
        count_both += result.e1 and result.e2
        gap_sum += result.gap
    return count_gap, count_e1, count_e2, count_both, gap_sum


def estimate_probabilities(
    params: ConstructionParams,
    trials: int,
    master_seed: int,
    workers: int | None = None,
) -> ExperimentReport:
    """Aggregate `trials` seeded trials into event frequencies with intervals.

    The chunked reduction makes the report a pure function of
    (params, trials, master_seed); `workers` only changes wall time.
    """
    if trials < 10**3:
        raise ValueError(f"trials must be at least 1000, got {trials}")
    chunks = [
        (start, min(start + CHUNK_SIZE, trials)) for start in range(0, trials, CHUNK_SIZE)
    ]
    worker_count = resolve_worker_count(workers)
    if worker_count == 1 or len(chunks) == 1:
        partials = [_run_chunk(params, master_seed, start, stop) for start, stop in chunks]
    else:
        with ThreadPoolExecutor(max_workers=worker_count) as pool:
            partials = list(
                pool.map(
                    lambda bounds: _run_chunk(params, master_seed, *bounds), chunks
                )
            )
    count_gap = count_e1 = count_e2 = count_both = 0
    gap_total = 0.0
    for chunk_gap, chunk_e1, chunk_e2, chunk_both, chunk_sum in partials:
        count_gap += chunk_gap
        count_e1 += chunk_e1
        count_e2 += chunk_e2
        count_both += chunk_both
        gap_total += chunk_sum
    return ExperimentReport(
        params=params,
        trials=trials,
        master_seed=master_seed,
        gap_event=_frequency(count_gap, trials),
        e1=_frequency(count_e1, trials),
        e2=_frequency(count_e2, trials),
        e1_and_e2=_frequency(count_both, trials),
        e1_given_e2=_frequency(count_both, count_e2),
        mean_gap=gap_total / trials,
        threshold=gap_threshold(params),
    )


def distinct_index_probability(params: ConstructionParams) -> float:
    """Exact probability that n uniform index draws from d bins all differ.

    The birthday product prod_{k=0}^{n-1} (1 - k/d); the independent
    oracle for the E1 frequency.
    """
    product = 1.0
    for k in range(params.n):
        product *= 1.0 - k / params.d
    return product


@dataclass(frozen=True)
class UpperBoundQuery:
    n: int
    gamma: float
    l: float
    delta: float

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")
        if self.gamma < 0.0 or self.l < 0.0:
            raise ValueError("gamma and l must be non-negative")


@dataclass(frozen=True)
class ReferenceBounds:
    """Shapes of the known high-probability upper bounds, REFERENCE ONLY.

    All big-O constants are set to 1, so the values are comparable to each
    other in shape but not to the measured gap in absolute terms.
    """

    sqrt_n_form: float
    log_sq_form: float
    log_form: float


def upper_bound_reference(query: UpperBoundQuery) -> ReferenceBounds:
    """Evaluate the three reference upper-bound shapes at one query point.

    sqrt_n_form: sqrt(n)*gamma*sqrt(log(1/delta)) + (l/sqrt(n))*sqrt(log(1/delta))
    log_sq_form: gamma*(log n)^2 + gamma*log(n)*log(1/delta) + (l/sqrt(n))*sqrt(log(1/delta))
    log_form:    gamma*log(n)*log(1/delta) + (l/sqrt(n))*sqrt(log(1/delta))
    """
    log_inv_delta = math.log(1.0 / query.delta)
    root_log = math.sqrt(log_inv_delta)
    log_n = math.log(query.n)
    sampling_term = (query.l / math.sqrt(query.n)) * root_log
    return ReferenceBounds(
        sqrt_n_form=math.sqrt(query.n) * query.gamma * root_log + sampling_term,
        log_sq_form=query.gamma * log_n**2
        + query.gamma * log_n * log_inv_delta
        + sampling_term,
        log_form=query.gamma * log_n * log_inv_delta + sampling_term,
    )
