"""Exception hierarchy for delayexp.

Every error raised on a documented failure path derives from DelayExpError,
so callers (and the CLI) can distinguish domain failures from bugs.
"""


class DelayExpError(Exception):
    """Base class for all delayexp domain errors."""


class DimensionMismatch(DelayExpError):
    """Matrices/vectors of a system do not share a single dimension n."""


class SingularA(DelayExpError):
    """The leading matrix A failed the invertibility (condition) check."""


class BadDelay(DelayExpError):
    """The delay m is not a positive integer."""


class NonFiniteEntry(DelayExpError):
    """A NaN or infinity was found where finite data is required."""


class Overflow(DelayExpError):
    """A computed quantity left the double-precision range.

    Carries the first offending time index when known.
    """

    def __init__(self, message, k=None):
        super().__init__(message)
        self.k = k


class ShapeMismatch(DelayExpError):
    """Two trajectories being compared do not share m, k_max and dimension."""


class DomainError(DelayExpError):
    """An argument lies outside the mathematical domain of an operation."""


class NegativeInnerIndex(DelayExpError):
    """A nested-sum evaluation asked for a sequence member at a negative index.

    Unreachable for arguments inside the documented domain; raising it
    signals a caller bug rather than bad data.
    """


class WorkBudgetExceeded(DelayExpError):
    """A reference evaluator refused to enumerate more terms than its budget."""


class SystemSpecError(DelayExpError):
    """A system-spec file could not be parsed or failed validation.

    ``field`` names the offending field (dotted path) when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
