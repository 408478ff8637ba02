"""Exception hierarchy shared by every csframes module."""


class CSFramesError(Exception):
    """Base class for all library errors."""


class TruncationInsufficient(CSFramesError):
    """The Fock cutoff is too small for the requested state or operator."""


class GridOverflow(CSFramesError):
    """The Hermite recurrence would under/overflow on the requested grid."""


class NonPositiveFactor(CSFramesError):
    """A nonlinearity value f(n) is not strictly positive and finite."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class RangeOverflow(CSFramesError):
    """A cumulative product left the double-precision range."""


class SpecRangeError(CSFramesError):
    """A tabulated nonlinearity was evaluated beyond its table."""


class NonPositiveMetric(CSFramesError):
    """A deformed metric F has a non-positive diagonal entry."""


class PreconditionViolated(CSFramesError):
    """An operation was called outside its documented regime."""


class OutsideDomain(CSFramesError):
    """The point z lies outside (or too close to) the family's disc of definition."""


class UnsupportedFamily(CSFramesError):
    """The operation is not defined for this family variant."""


class NotSymplectic(CSFramesError):
    """A 2x2 matrix does not have unit determinant."""


class Degenerate(CSFramesError):
    """A least-squares fit has no unique solution."""


class IllConditioned(CSFramesError):
    """A linear-algebra step would lose all accuracy."""


class SupportMismatch(CSFramesError):
    """A radial measure reaches beyond the family's convergence radius."""


class MomentOverflow(CSFramesError):
    """Target moments exceed the double-precision range."""


class InfeasibleMoments(CSFramesError):
    """No nonnegative measure on the grid matches the moments to tolerance.

    The best-effort measure and its residual are attached so callers can
    report them, but they are never returned as a normal result.
    """

    def __init__(self, message, measure=None, residual=None):
        super().__init__(message)
        self.measure = measure
        self.residual = residual


class ConfigError(CSFramesError):
    """An experiment configuration failed to parse or validate."""

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
