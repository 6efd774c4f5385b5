"""Exception hierarchy shared by all modules."""


class NEntireError(Exception):
    """Base class for library errors."""


class InvalidParameterError(NEntireError, ValueError):
    """A precondition on an argument was violated."""


class NumericalFailure(NEntireError, RuntimeError):
    """A numerical routine could not produce a trustworthy result.

    ``interval`` carries the bracket or region involved, when there is one.
    """

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class InconclusiveError(NEntireError):
    """Finite data cannot decide the question; ``trace`` holds the evidence."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace if trace is not None else []


class InterlacingViolation(NEntireError):
    """Two spectra that must interlace do not."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class PoleError(NEntireError, ZeroDivisionError):
    """Evaluation requested at an eigenvalue (pole of the resolvent)."""


class DivergentIntegralError(NEntireError):
    """The integrand does not decay fast enough for the integral to exist."""
