"""Shared exception types."""


class GuardExceededError(RuntimeError):
    """An exact or exhaustive routine was asked to exceed its enumeration budget.

    The message names the cheaper fallback (closed form, Monte Carlo, or
    randomized search) the caller should use instead.
    """


class InvariantViolationError(RuntimeError):
    """A certified guarantee failed at runtime.

    Raised only when a deterministic mathematical guarantee is observed to
    fail, which signals an implementation bug; the message carries enough
    context (seed, parameters) to reproduce the failing case.
    """
