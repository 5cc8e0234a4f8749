"""Exception hierarchy shared across the package."""


class SubnewtonError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SubnewtonError):
    """A data file could not be parsed; carries the offending line number."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class DataError(SubnewtonError):
    """Dataset-level problem: bad labels, empty data, degenerate splits."""


class DimensionError(SubnewtonError):
    """Shape contract violation between weights, vectors and datasets."""


class CurvatureError(SubnewtonError):
    """CG observed non-positive curvature; the supplied operator is not SPD."""


class LineSearchError(SubnewtonError):
    """No trial step satisfied the Armijo condition."""
