"""Anti-concentration checks: second-moment tail bounds and Rademacher sums.

Two facts are certified numerically.  First, for any non-negative random
variable Z with finite second moment and any theta in [0, 1],

    P(Z > theta*E[Z]) >= (1 - theta)^2 * E[Z]^2 / E[Z^2],

verified exactly on finitely supported distributions.  Second, for a sum
S of n independent uniform +-1 variables,

    P(S > sqrt(n)/2) >= 3/32,

verified pointwise through the exact binomial tail.  The proof route for
the second fact runs through the moment identities E[S^2] = n and
E[S^4] = n + 3n(n-1) = 3n^2 - 2n, which a Monte Carlo companion checks.

Since S has the parity of n, the strict comparison S > sqrt(n)/2 is
evaluated in integers as (S > 0 and 4*S^2 > n), which is immune to
floating-point boundary errors when n is a perfect square.  Exact tails
use big-integer rationals up to n = 64 and log-domain summation of
binomial terms above that (relative error well inside 1e-12).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import GuardExceededError

RADEMACHER_TAIL_BOUND = 3.0 / 32.0
EXACT_RATIONAL_MAX_N = 64
TAIL_GUARD_MAX_N = 10**6
_PROBABILITY_SUM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class DiscreteDistribution:
    """A finitely supported non-negative random variable.

    `support` holds (value, probability) pairs; probabilities must be
    non-negative and sum to 1 within 1e-12, values must be >= 0.
    """

    support: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.support:
            raise ValueError("support must be non-empty")
        total = 0.0
        for value, prob in self.support:
            if value < 0.0:
                raise ValueError(f"support values must be >= 0, got {value}")
            if prob < 0.0:
                raise ValueError(f"probabilities must be >= 0, got {prob}")
            total += prob
        if abs(total - 1.0) > _PROBABILITY_SUM_TOLERANCE:
            raise ValueError(f"probabilities must sum to 1, got {total!r}")

    def mean(self) -> float:
        return sum(value * prob for value, prob in self.support)

    def second_moment(self) -> float:
        return sum(value * value * prob for value, prob in self.support)

    def tail_probability(self, threshold: float) -> float:
        """Exact P(Z > threshold) by summation over the support."""
        return sum(prob for value, prob in self.support if value > threshold)


def paley_zygmund_bound(mean: float, second_moment: float, theta: float) -> float:
    """Second-moment lower bound (1-theta)^2 * mean^2 / second_moment."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must be in [0, 1], got {theta}")
    if second_moment <= 0.0:
        raise ValueError(f"second moment must be positive, got {second_moment}")
    if mean < 0.0:
        raise ValueError(f"mean must be >= 0, got {mean}")
    if second_moment < mean * mean:
        raise ValueError(
            f"second moment {second_moment} below mean^2 {mean * mean}; "
            "inconsistent moments"
        )
    return (1.0 - theta) ** 2 * mean * mean / second_moment


@dataclass(frozen=True)
class PaleyZygmundCheck:
    """Witness values of one tail-versus-bound comparison."""

    theta: float
    mean: float
    second_moment: float
    tail: float
    bound: float
    holds: bool


def verify_paley_zygmund(dist: DiscreteDistribution, theta: float) -> PaleyZygmundCheck:
    """Compare the exact tail P(Z > theta*E[Z]) against the second-moment bound.

    `holds` must come back True for every valid distribution; a False
    return signals an implementation bug, which the test suite treats as a
    hard failure.  The degenerate all-zero distribution has bound 0.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must be in [0, 1], got {theta}")
    mean = dist.mean()
    second_moment = dist.second_moment()
    tail = dist.tail_probability(theta * mean)
    if second_moment == 0.0:
        bound = 0.0
    else:
        bound = paley_zygmund_bound(mean, second_moment, theta)
    return PaleyZygmundCheck(
        theta=theta,
        mean=mean,
        second_moment=second_moment,
        tail=tail,
        bound=bound,
        holds=tail >= bound,
    )


def random_distribution(
    rng: np.random.Generator, max_points: int = 16, max_value: float = 10.0
) -> DiscreteDistribution:
    """A random finitely supported non-negative distribution for property runs.

    Support size uniform on [1, max_points], values uniform on
    [0, max_value], probabilities drawn positive and normalized.
    """
    size = int(rng.integers(1, max_points + 1))
    values = rng.uniform(0.0, max_value, size=size)
    weights = rng.uniform(0.05, 1.0, size=size)
    probs = weights / weights.sum()
    return DiscreteDistribution(
        support=tuple((float(v), float(p)) for v, p in zip(values, probs))
    )


@dataclass(frozen=True)
class TailReport:
    n: int
    exact_tail: float
    bound: float
    satisfied: bool


def _tail_count_range(n: int) -> int:
    """Smallest +1 count k such that S = 2k - n satisfies S > sqrt(n)/2.

    Strictness is decided in integers: S > sqrt(n)/2 with S > 0 iff
    4*S^2 > n.
    """
    # S = 2k - n ranges over {-n, -n+2, ..., n}; find the least admissible S.
    s = 1 if n % 2 else 2
    while not (s > 0 and 4 * s * s > n):
        s += 2
    return (n + s) // 2


def _tail_fraction(n: int, k_min: int) -> Fraction:
    """Tail as an exact big-integer rational sum of binomial terms."""
    numerator = sum(math.comb(n, k) for k in range(k_min, n + 1))
    return Fraction(numerator, 2**n)


def _tail_log_domain(n: int, k_min: int) -> float:
    """Tail by log-domain binomial summation; relative error < 1e-12."""
    ks = np.arange(k_min, n + 1, dtype=np.float64)
    log_terms = (
        gammaln(n + 1.0) - gammaln(ks + 1.0) - gammaln(n - ks + 1.0) - n * math.log(2.0)
    )
    return float(np.exp(logsumexp(log_terms)))


def rademacher_tail_exact(n: int) -> TailReport:
    """Exact P(sum of n independent +-1 signs > sqrt(n)/2).

    Big-integer rationals up to n = 64 (including an exact rational
    comparison against 3/32); log-domain binomial summation above that.
    Guarded at n = 10^6; beyond the guard use
    :func:`rademacher_tail_montecarlo`.
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if n > TAIL_GUARD_MAX_N:
        raise GuardExceededError(
            f"n = {n} exceeds the exact-tail guard {TAIL_GUARD_MAX_N}; "
            "use rademacher_tail_montecarlo"
        )
    k_min = _tail_count_range(n)
    if n <= EXACT_RATIONAL_MAX_N:
        tail_fraction = _tail_fraction(n, k_min)
        satisfied = tail_fraction >= Fraction(3, 32)
        exact_tail = float(tail_fraction)
    else:
        exact_tail = _tail_log_domain(n, k_min)
        satisfied = exact_tail >= RADEMACHER_TAIL_BOUND
    return TailReport(
        n=n, exact_tail=exact_tail, bound=RADEMACHER_TAIL_BOUND, satisfied=satisfied
    )


@dataclass(frozen=True)
class MonteCarloTail:
    n: int
    trials: int
    hits: int
    estimate: float
    stderr: float


def rademacher_tail_montecarlo(
    n: int, trials: int, rng: np.random.Generator
) -> MonteCarloTail:
    """Empirical frequency of {sum > sqrt(n)/2} with binomial standard error.

    The sum of n independent +-1 signs is sampled as 2*Binomial(n, 1/2) - n,
    an exact distributional identity, so a trial costs O(1) generator work.
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if trials < 10**3:
        raise ValueError(f"trials must be at least 1000, got {trials}")
    counts = rng.binomial(n, 0.5, size=trials)
    sums = 2 * counts.astype(np.int64) - n
    hits = int(((sums > 0) & (4 * sums * sums > n)).sum())
    estimate = hits / trials
    stderr = math.sqrt(estimate * (1.0 - estimate) / trials)
    return MonteCarloTail(n=n, trials=trials, hits=hits, estimate=estimate, stderr=stderr)


@dataclass(frozen=True)
class MomentCheck:
    """Monte Carlo second and fourth moments of the sign sum versus exact targets."""

    n: int
    trials: int
    mean_square: float
    mean_fourth: float
    target_square: float
    target_fourth: float
    stderr_square: float
    stderr_fourth: float
    z_square: float
    z_fourth: float


def _z_score(estimate: float, target: float, stderr: float) -> float:
    if stderr == 0.0:
        return 0.0 if estimate == target else math.inf
    return (estimate - target) / stderr


def rademacher_moment_check(
    n: int, trials: int, rng: np.random.Generator
) -> MomentCheck:
    """Estimate E[S^2] and E[S^4] and report z-scores against n and 3n^2 - 2n."""
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if trials < 10**4:
        raise ValueError(f"trials must be at least 10^4, got {trials}")
    counts = rng.binomial(n, 0.5, size=trials)
    sums = (2 * counts.astype(np.int64) - n).astype(np.float64)
    squares = sums * sums
    fourths = squares * squares
    mean_square = float(squares.mean())
    mean_fourth = float(fourths.mean())
    stderr_square = float(squares.std(ddof=1) / math.sqrt(trials))
    stderr_fourth = float(fourths.std(ddof=1) / math.sqrt(trials))
    target_square = float(n)
    target_fourth = float(3 * n * n - 2 * n)
    return MomentCheck(
        n=n,
        trials=trials,
        mean_square=mean_square,
        mean_fourth=mean_fourth,
        target_square=target_square,
        target_fourth=target_fourth,
        stderr_square=stderr_square,
        stderr_fourth=stderr_fourth,
        z_square=_z_score(mean_square, target_square, stderr_square),
        z_fourth=_z_score(mean_fourth, target_fourth, stderr_fourth),
    )
