"""Exception types shared across the package."""


class HnlaError(Exception):
    """Base class for physics or numerical-budget failures."""


class UnphysicalGainError(HnlaError, ValueError):
    """The requested gain drives a squeezing parameter to infinity."""


class CutoffTooLargeError(HnlaError, OverflowError):
    """Intermediate magnitudes left the representable floating-point range."""


class BudgetError(HnlaError):
    """A truncation or grid budget was violated."""


class TruncationWarning(UserWarning):
    """Emitted when a result depends noticeably on the Fock cutoff."""
