"""Exception types; the CLI maps each to a distinct exit code."""


class ParseError(ValueError):
    """An input file or string could not be parsed."""


class MetricValidationError(ValueError):
    """A distance matrix is not a metric (within tolerance)."""


class InvariantViolation(ValueError):
    """A computed result breaks a property the library guarantees."""


class UnsupportedModelError(ValueError):
    """The requested model is outside what the library supports (e.g. a recurrent walk)."""


class ResourceCapError(RuntimeError):
    """A configured size or iteration cap would be exceeded."""


class ConvergenceError(RuntimeError):
    """An iterative computation did not converge within its cap."""
