"""Exception types shared across the library.

Each error class maps to a distinct CLI exit code (see cli.EXIT_CODES), so
callers can tell configuration mistakes apart from numerical refusals.
"""


class LocwordError(Exception):
    """Base class for all library errors."""


class ParameterError(LocwordError, ValueError):
    """Invalid argument values: bad weights, empty grids, nonpositive data."""


class CoverageError(LocwordError):
    """A window or word range extends beyond the sampled realization."""


class NearSingularError(LocwordError):
    """Energy too close to the finite-volume spectrum for a resolvent solve."""


class InsufficientTrialsError(LocwordError):
    """An empirical probability came out zero, so its log cannot be fit.

    Carries the offending scale in ``n``.
    """

    def __init__(self, message, n=None):
        super().__init__(message)
        self.n = n


class EmptyBandError(LocwordError):
    """No eigenvalue fell inside the requested energy interval."""


class ReflectionError(LocwordError):
    """Box too small for the requested evolution time; data would be
    contaminated by reflections off the box edge."""
