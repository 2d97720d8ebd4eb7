"""Exception hierarchy. The CLI maps these onto exit codes."""


class MarginLabError(Exception):
    """Base class for all library errors."""


class DatasetFormatError(MarginLabError, ValueError):
    """A dataset file could not be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GenerationError(MarginLabError):
    """Rejection sampling exceeded its attempt cap."""


class NonSeparableError(MarginLabError):
    """The optimal margin is at or below the separability threshold."""


class ConvergenceError(MarginLabError):
    """An iterative solver hit its iteration cap before certifying."""


class NumericalError(MarginLabError, ArithmeticError):
    """Non-finite state, divergence, or a degenerate iterate."""


class DatasetMismatchError(MarginLabError, ValueError):
    """A trajectory or solution refers to a different dataset."""


class RateFitError(MarginLabError, ValueError):
    """Not enough usable points for a log-log fit."""
