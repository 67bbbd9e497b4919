"""Worst-case learning problem on a signed, scaled coordinate basis.

The instance space consists of the 2*d sparse vectors +-lmax*sigma(i)*e_i
in an ambient space with d = 4*n^2 coordinates.  The per-coordinate scale
factor sigma(i) is 1 on the lower half of the coordinates and 2 on the
upper half, so exactly half of the instances are "short" and half "long".
Every instance is its own label and the sampling distribution is uniform
over the 2*d points.

The learning rule is a per-coordinate majority vote over training signs:
queried at +-lmax*sigma(i)*e_i it outputs

    sign(sum of training signs on coordinate i) * g * sigma(i) * e_i

with the tie convention sign(0) = +1, and losses are l1 distances between
the implied sparse vectors.  Callers specify target budgets (gamma, l) for
the stability coefficient and the loss bound; the construction internally
uses g = gamma/4 and lmax = l/4 so that the certified stability stays at
or below gamma and the certified loss maximum at or below l.

Instances are (index, sign) pairs throughout; dense length-d vectors are
never materialized.  All operations are pure functions of their inputs
plus an explicitly passed random generator, so they are safe to call
concurrently as long as generators are not shared between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class ConstructionParams:
    """Target budgets plus the derived quantities of the hard case.

    Fields g, lmax and d are derived: g = gamma_target / 4,
    lmax = l_target / 4 and d = 4 * n^2.  Use :meth:`from_targets` to
    build a consistent instance.
    """

    n: int
    gamma_target: float
    l_target: float
    g: float
    lmax: float
    d: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not (0.0 < self.gamma_target <= self.l_target):
            raise ValueError(
                "requires 0 < gamma_target <= l_target, got "
                f"gamma_target={self.gamma_target}, l_target={self.l_target}"
            )
        if self.g != self.gamma_target / 4.0 or self.lmax != self.l_target / 4.0:
            raise ValueError("g and lmax must equal a quarter of the targets")
        if self.d != 4 * self.n * self.n:
            raise ValueError(f"d must equal 4*n^2 = {4 * self.n * self.n}, got {self.d}")

    @classmethod
    def from_targets(cls, n: int, gamma: float, l: float) -> "ConstructionParams":
        """Derive the construction scales from the target (gamma, l, n)."""
        if not isinstance(n, int) or n < 1:
            raise ValueError(f"n must be a positive integer, got {n!r}")
        return cls(
            n=n,
            gamma_target=float(gamma),
            l_target=float(l),
            g=float(gamma) / 4.0,
            lmax=float(l) / 4.0,
            d=4 * n * n,
        )

    @property
    def half_d(self) -> int:
        """Boundary of the scale-factor indicator: sigma = 1 iff index <= d/2."""
        return self.d // 2


@dataclass(frozen=True)
class Instance:
    """One domain point, the sparse form of sign * lmax * sigma(index) * e_index."""

    index: int
    sign: int

    def __post_init__(self) -> None:
        if not isinstance(self.index, int) or self.index < 1:
            raise ValueError(f"index must be a positive integer, got {self.index!r}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")


@dataclass(frozen=True)
class LabeledExample:
    """An (x, y) pair; in this problem the label of every instance is itself."""

    x: Instance
    y: Instance

    def __post_init__(self) -> None:
        if self.y != self.x:
            raise ValueError("the label of every instance is the instance itself")

    @classmethod
    def of(cls, x: Instance) -> "LabeledExample":
        return cls(x=x, y=x)


@dataclass(frozen=True)
class TrainingSet:
    """An ordered training sample in sparse columnar form.

    `indices[k]` and `signs[k]` describe the k-th labeled example; the
    object view is available through :attr:`examples`.  The columnar form
    is what the high-throughput trial pipeline operates on.
    """

    indices: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.indices) != len(self.signs):
            raise ValueError("indices and signs must have equal length")

    @classmethod
    def from_examples(cls, examples) -> "TrainingSet":
        examples = tuple(examples)
        return cls(
            indices=tuple(ex.x.index for ex in examples),
            signs=tuple(ex.x.sign for ex in examples),
        )

    @property
    def examples(self) -> tuple[LabeledExample, ...]:
        return tuple(
            LabeledExample.of(Instance(i, s)) for i, s in zip(self.indices, self.signs)
        )

    def __len__(self) -> int:
        return len(self.indices)

    # cached_property writes to the instance __dict__, bypassing the frozen
    # guard; the arrays are derived views, not independent state.
    @cached_property
    def index_array(self) -> np.ndarray:
        return np.array(self.indices, dtype=np.int64)

    @cached_property
    def sign_array(self) -> np.ndarray:
        return np.array(self.signs, dtype=np.int64)


@dataclass(frozen=True)
class Prediction:
    """Sparse learner output: sign_hat * g * sigma(index) * e_index."""

    index: int
    sign_hat: int


def scale_factor(index: int, params: ConstructionParams) -> int:
    """Per-coordinate scale: 1 on the lower half of indices, 2 on the upper."""
    if not 1 <= index <= params.d:
        raise ValueError(f"index must be in [1, {params.d}], got {index}")
    return 1 if index <= params.half_d else 2


def sample_instance(params: ConstructionParams, rng: np.random.Generator) -> Instance:
    """Draw one instance uniformly from the 2*d domain points."""
    index = int(rng.integers(1, params.d + 1))
    sign = 1 if int(rng.integers(0, 2)) else -1
    return Instance(index=index, sign=sign)


def sample_training_set(params: ConstructionParams, rng: np.random.Generator) -> TrainingSet:
    """Draw n i.i.d. labeled examples in two vectorized generator calls.

    Same law as n repeated :func:`sample_instance` draws (index uniform on
    [1, d], sign uniform on +-1, independent), batched for throughput.
    """
    indices = rng.integers(1, params.d + 1, size=params.n)
    signs = 2 * rng.integers(0, 2, size=params.n) - 1
    return TrainingSet(indices=tuple(indices.tolist()), signs=tuple(signs.tolist()))


def coordinate_sign(train: TrainingSet, index: int) -> int:
    """Sign of the summed training signs on one coordinate, with sign(0) = +1."""
    hits = train.index_array == index
    if not hits.any():
        return 1
    total = int(train.sign_array[hits].sum())
    return 1 if total >= 0 else -1


def predict(train: TrainingSet, x: Instance, params: ConstructionParams) -> Prediction:
    """Majority-vote output at x; depends on x only through its index."""
    scale_factor(x.index, params)  # range check
    return Prediction(index=x.index, sign_hat=coordinate_sign(train, x.index))


def loss(pred: Prediction, y: Instance, params: ConstructionParams) -> float:
    """l1 distance between the implied prediction and label vectors.

    On a shared coordinate this is sigma(i) * |sign_hat*g - sign(y)*lmax|,
    i.e. sigma(i)*(lmax - g) on sign agreement and sigma(i)*(lmax + g) on
    disagreement; across distinct coordinates the supports are disjoint and
    the norms add.
    """
    if pred.index == y.index:
        s = scale_factor(pred.index, params)
        return s * abs(pred.sign_hat * params.g - y.sign * params.lmax)
    return params.g * scale_factor(pred.index, params) + params.lmax * scale_factor(
        y.index, params
    )


def scale_factor_sum(train: TrainingSet, params: ConstructionParams) -> int:
    """Integer sum of per-sample scale factors (each 1 or 2)."""
    return len(train) + int((train.index_array > params.half_d).sum())
