"""Exception hierarchy shared by every stage of the pipeline.

The CLI maps these onto exit codes: ParameterError -> 1 (usage),
DataError subclasses -> 2 (bad input), NumericError -> 3.
"""


class ScesameError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(ScesameError):
    """A configuration value is out of its documented range."""


class DataError(ScesameError):
    """Input data violates a documented invariant."""


class MalformedInputError(DataError):
    """Unparseable or internally inconsistent serialized input."""


class ShapeError(DataError):
    """Array dimensions do not agree."""


class EmptyMaskError(DataError):
    """An operation that needs foreground pixels got a mask without any."""


class TooFewMasksError(DataError):
    """Pairwise mask operations need at least two masks."""


class InvalidAffinityError(DataError):
    """An affinity matrix is asymmetric or has negative entries."""


class NumericError(ScesameError):
    """A numerical routine failed to converge or produced garbage."""
