"""Exception types shared across the package."""


class TwrError(Exception):
    """Base class for all package errors."""


class InvalidSpecError(TwrError, ValueError):
    """A channel/system specification is malformed (bad dimension, variance, ...)."""


class InvalidInputError(TwrError, ValueError):
    """A numeric input violates its contract (non-PSD matrix, wrong shape, ...)."""


class InvalidProgramError(TwrError, ValueError):
    """A convex program description is ill-formed."""


class UnachievableRateError(TwrError, ValueError):
    """A requested rate cannot be met on the given gain set."""
