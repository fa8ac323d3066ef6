"""Exception types shared across the package."""


class TruncGaussError(Exception):
    """Base class for all package errors."""


class DomainError(TruncGaussError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class NumericError(TruncGaussError, ArithmeticError):
    """An iterative scheme failed to converge or produced a non-finite value.

    The message carries diagnostics (arguments, iteration counts) so the
    failure can be reproduced.
    """


class DegenerateAcceptanceError(NumericError):
    """A rejection sampler kept zero samples (radius too small for the budget)."""


class CapabilityError(TruncGaussError, ValueError):
    """The requested computation exceeds what this evaluation path supports.

    The message names the alternative path (typically the Monte Carlo oracle).
    """
