"""Exception hierarchy shared by all modules."""


class SiklosError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SiklosError, ValueError):
    """A function was evaluated outside its real domain."""


class DivisionByZero(SiklosError, ZeroDivisionError):
    """Jet division by a value that is exactly zero."""


class ExprSyntaxError(SiklosError, ValueError):
    """Malformed expression text; ``offset`` is the byte offset of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifier(ExprSyntaxError):
    def __init__(self, name, offset):
        super().__init__(f"unknown identifier {name!r}", offset)
        self.name = name


class ChartError(SiklosError, ValueError):
    """Point lies outside the chart x3 > 0."""


class ChartExit(ChartError):
    """A trajectory left the chart during integration."""


class StepError(SiklosError, ValueError):
    pass


class SingularMetric(SiklosError, ValueError):
    pass


class RankDeficient(SiklosError, ValueError):
    """The immersion Jacobian does not have rank 3."""


class NullNormal(SiklosError, ValueError):
    """The normal direction is null, so the hypersurface is degenerate."""


class SampleError(SiklosError, ValueError):
    """Classification failed at one or more sample points."""

    def __init__(self, message, points=()):
        super().__init__(message)
        self.points = list(points)


class DomainViolation(SiklosError, ValueError):
    """A sample lies outside a catalog entry's admissible region."""


class ConfigError(SiklosError, ValueError):
    pass
