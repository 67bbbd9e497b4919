"""Numerical certificates for stability and loss boundedness.

A learning rule is certified by searching for the largest change in loss
at any evaluation point when one training example is replaced:

    sup |loss(rule(S)(x), y) - loss(rule(S^i)(x), y)|

over training sets S drawn from the labeled domain, replacement positions
i, replacement examples, and evaluation points (x, y).  Exhaustive search
enumerates the whole space on small instances; randomized search samples
it with a bias toward informative tuples on large ones.  For the
majority-vote construction the supremum equals 4*g (a sign flip on a
scale-2 coordinate), which by the internal rescaling is exactly the
caller's gamma_target.

Certificates carry the arg-max tuple so any reported value can be replayed
as a concrete test case.  Float comparisons against certificate values use
absolute tolerance 1e-12; every certified quantity is a small integer
combination of g and lmax.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .construction import (
    ConstructionParams,
    Instance,
    LabeledExample,
    Prediction,
    TrainingSet,
    loss,
    predict,
    sample_training_set,
)
from .errors import GuardExceededError, InvariantViolationError

CERTIFICATE_TOLERANCE = 1e-12
EXHAUSTIVE_GUARD = 10**9
EXHAUSTIVE_MAX_N = 3


@dataclass(frozen=True)
class LearningRule:
    """A deterministic rule: a predictor plus the loss used to score it.

    Both callables must be pure; the certifiers re-evaluate tuples freely
    and rely on identical inputs producing identical outputs.
    """

    name: str
    predict_fn: Callable[[TrainingSet, Instance], Prediction]
    loss_fn: Callable[[Prediction, Instance], float]


def majority_vote_rule(params: ConstructionParams) -> LearningRule:
    """The construction's coordinate majority vote with its l1 loss."""

    def _predict(train: TrainingSet, x: Instance) -> Prediction:
        return predict(train, x, params)

    def _loss(pred: Prediction, y: Instance) -> float:
        return loss(pred, y, params)

    return LearningRule(name="coordinate-majority-vote", predict_fn=_predict, loss_fn=_loss)


def constant_rule(params: ConstructionParams) -> LearningRule:
    """Sanity anchor: ignores the training set, always votes +1."""

    def _predict(train: TrainingSet, x: Instance) -> Prediction:
        return Prediction(index=x.index, sign_hat=1)

    def _loss(pred: Prediction, y: Instance) -> float:
        return loss(pred, y, params)

    return LearningRule(name="constant-plus", predict_fn=_predict, loss_fn=_loss)


@dataclass(frozen=True)
class StabilityWitness:
    """The arg-max tuple of a certification run."""

    train: TrainingSet
    position: int
    replacement: LabeledExample
    point: LabeledExample
    delta: float


@dataclass(frozen=True)
class StabilityCertificate:
    """Search outcome; exhaustive mode reports the true supremum over the
    enumerated space, randomized mode a lower bound on it."""

    supremum_found: float
    mode: str
    budget_inspected: int
    witness: StabilityWitness | None


def replace_one(train: TrainingSet, position: int, replacement: LabeledExample) -> TrainingSet:
    """Copy of `train` with the example at 1-based `position` swapped out."""
    n = len(train)
    if not 1 <= position <= n:
        raise ValueError(f"position must be in [1, {n}], got {position}")
    i = position - 1
    indices = list(train.indices)
    signs = list(train.signs)
    indices[i] = replacement.x.index
    signs[i] = replacement.x.sign
    return TrainingSet(indices=tuple(indices), signs=tuple(signs))


def evaluate_replacement(
    rule: LearningRule,
    train: TrainingSet,
    position: int,
    replacement: LabeledExample,
    point: LabeledExample,
) -> float:
    """|loss difference| at one (S, i, replacement, evaluation-point) tuple."""
    modified = replace_one(train, position, replacement)
    before = rule.loss_fn(rule.predict_fn(train, point.x), point.y)
    after = rule.loss_fn(rule.predict_fn(modified, point.x), point.y)
    return abs(before - after)


def _domain_pairs(d: int) -> list[tuple[int, int]]:
    return [(index, sign) for index in range(1, d + 1) for sign in (1, -1)]


def _raw_space(params: ConstructionParams) -> int:
    two_d = 2 * params.d
    return (two_d**params.n) * params.n * two_d * two_d


def certify_stability_exhaustive(
    params: ConstructionParams, rule: LearningRule | None = None
) -> StabilityCertificate:
    """True supremum of |loss difference| over the full replacement space.

    With the default majority-vote rule the scan prunes provably-zero
    tuples (see the argument in the implementation); an explicitly passed
    rule is enumerated without pruning.  Raises GuardExceededError when
    n > 3 or the work estimate passes 10^9 tuples; callers then fall back
    to :func:`certify_stability_random`.
    """
    if params.n > EXHAUSTIVE_MAX_N:
        raise GuardExceededError(
            f"exhaustive certification supports n <= {EXHAUSTIVE_MAX_N}, got "
            f"n = {params.n}; use certify_stability_random"
        )
    if rule is None:
        # Pruned scan touches at most 4 evaluation points per (S, i, r).
        reduced_work = (2 * params.d) ** params.n * params.n * (2 * params.d) * 4
        if reduced_work > EXHAUSTIVE_GUARD:
            raise GuardExceededError(
                f"exhaustive search work {reduced_work} exceeds {EXHAUSTIVE_GUARD}; "
                "use certify_stability_random"
            )
        return _exhaustive_majority_vote(params)
    raw = _raw_space(params)
    if raw > EXHAUSTIVE_GUARD:
        raise GuardExceededError(
            f"exhaustive search space {raw} exceeds {EXHAUSTIVE_GUARD}; "
            "use certify_stability_random"
        )
    return _exhaustive_generic(params, rule)


def _exhaustive_majority_vote(params: ConstructionParams) -> StabilityCertificate:
    # Pruning argument.  The vote at an evaluation point depends only on the
    # signed count of training signs at that point's index.  Replacing the
    # example at position i changes signed counts only at the outgoing
    # example's index and the incoming example's index, so at every other
    # evaluation point the two predictions, hence the two losses, are
    # identical and the difference is 0.  The value 0 is itself attained
    # inside the space (take the replacement equal to the existing entry),
    # so skipping the provably-zero tuples leaves the supremum unchanged.
    d = params.d
    n = params.n
    g = params.g
    lmax = params.lmax
    half = params.half_d
    domain = _domain_pairs(d)
    best = 0.0
    best_tuple: tuple | None = None
    for sample in itertools.product(domain, repeat=n):
        counts: dict[int, int] = {}
        for index, sign in sample:
            counts[index] = counts.get(index, 0) + sign
        for pos in range(n):
            out_index, out_sign = sample[pos]
            for in_index, in_sign in domain:
                affected = (out_index,) if in_index == out_index else (out_index, in_index)
                for j in affected:
                    before = counts.get(j, 0)
                    after = before
                    if j == out_index:
                        after -= out_sign
                    if j == in_index:
                        after += in_sign
                    hat_before = 1 if before >= 0 else -1
                    hat_after = 1 if after >= 0 else -1
                    if hat_before == hat_after:
                        continue
                    sigma = 1 if j <= half else 2
                    for eval_sign in (1, -1):
                        loss_before = sigma * abs(hat_before * g - eval_sign * lmax)
                        loss_after = sigma * abs(hat_after * g - eval_sign * lmax)
                        delta = abs(loss_before - loss_after)
                        if delta > best:
                            best = delta
                            best_tuple = (sample, pos + 1, (in_index, in_sign), (j, eval_sign))
    witness = None
    if best_tuple is not None:
        sample, position, replacement, point = best_tuple
        witness = StabilityWitness(
            train=TrainingSet(
                indices=tuple(i for i, _ in sample), signs=tuple(s for _, s in sample)
            ),
            position=position,
            replacement=LabeledExample.of(Instance(*replacement)),
            point=LabeledExample.of(Instance(*point)),
            delta=best,
        )
    return StabilityCertificate(
        supremum_found=best,
        mode="exhaustive",
        budget_inspected=_raw_space(params),
        witness=witness,
    )


def _exhaustive_generic(params: ConstructionParams, rule: LearningRule) -> StabilityCertificate:
    examples = [LabeledExample.of(Instance(i, s)) for i, s in _domain_pairs(params.d)]
    best = -1.0
    best_witness: StabilityWitness | None = None
    for combo in itertools.product(examples, repeat=params.n):
        train = TrainingSet.from_examples(combo)
        base = [rule.loss_fn(rule.predict_fn(train, pt.x), pt.y) for pt in examples]
        for position in range(1, params.n + 1):
            for replacement in examples:
                modified = replace_one(train, position, replacement)
                for pt, loss_before in zip(examples, base):
                    loss_after = rule.loss_fn(rule.predict_fn(modified, pt.x), pt.y)
                    delta = abs(loss_before - loss_after)
                    if delta > best:
                        best = delta
                        best_witness = StabilityWitness(
                            train=train,
                            position=position,
                            replacement=replacement,
                            point=pt,
                            delta=delta,
                        )
    return StabilityCertificate(
        supremum_found=max(best, 0.0),
        mode="exhaustive",
        budget_inspected=_raw_space(params),
        witness=best_witness,
    )


def certify_stability_random(
    params: ConstructionParams,
    trials: int,
    rng: np.random.Generator,
    rule: LearningRule | None = None,
) -> StabilityCertificate:
    """Lower-bound the stability supremum by biased random search.

    Each trial samples a fresh training set, replaces one position, and
    evaluates the loss difference at one point.  Half the replacements
    flip the sign of the outgoing example in place and evaluation is biased
    toward the touched coordinates, which is where the majority vote can
    change; for the construction rule the known supremum 4*g is typically
    hit within a few dozen trials.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    rule_obj = rule if rule is not None else majority_vote_rule(params)
    d = params.d
    n = params.n
    best = -1.0
    best_witness: StabilityWitness | None = None
    for _ in range(trials):
        train = sample_training_set(params, rng)
        position = int(rng.integers(1, n + 1))
        out_index = train.indices[position - 1]
        out_sign = train.signs[position - 1]
        if rng.random() < 0.5:
            in_index, in_sign = out_index, -out_sign
        else:
            in_index = int(rng.integers(1, d + 1))
            in_sign = 1 if int(rng.integers(0, 2)) else -1
        pick = rng.random()
        if pick < 0.45:
            eval_index = out_index
        elif pick < 0.9:
            eval_index = in_index
        else:
            eval_index = int(rng.integers(1, d + 1))
        eval_sign = 1 if int(rng.integers(0, 2)) else -1
        replacement = LabeledExample.of(Instance(in_index, in_sign))
        point = LabeledExample.of(Instance(eval_index, eval_sign))
        delta = evaluate_replacement(rule_obj, train, position, replacement, point)
        if delta > best:
            best = delta
            best_witness = StabilityWitness(
                train=train,
                position=position,
                replacement=replacement,
                point=point,
                delta=delta,
            )
    return StabilityCertificate(
        supremum_found=max(best, 0.0),
        mode="randomized",
        budget_inspected=trials,
        witness=best_witness,
    )


def loss_upper_bound(lmax: float, g: float) -> float:
    """Exact maximum same-coordinate loss 2*(lmax + g)."""
    return 2.0 * (lmax + g)


def certify_boundedness(params: ConstructionParams) -> float:
    """Closed-form loss maximum, checked against the l_target budget.

    The maximum over same-coordinate (prediction, label) pairs is
    2*(lmax + g), attained at a scale-2 coordinate with opposing signs;
    g <= lmax makes it at most 4*lmax = l_target.
    """
    maximum = loss_upper_bound(params.lmax, params.g)
    if maximum > params.l_target + CERTIFICATE_TOLERANCE:
        raise InvariantViolationError(
            f"loss maximum {maximum} exceeds the target budget {params.l_target}"
        )
    return maximum
