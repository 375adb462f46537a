"""Exception hierarchy.

Validation problems derive from :class:`ValueError`; resource guards derive
from :class:`ResourceGuardError` so the CLI can map them to exit code 3.
"""


class HoqmcError(Exception):
    """Base class for all package errors."""


class InvalidInput(HoqmcError, ValueError):
    """Base class for precondition violations."""


class ResourceGuardError(HoqmcError):
    """A configured size guard was exceeded."""


# gf
class InvalidBase(InvalidInput):
    pass


class InversionOfZero(InvalidInput, ZeroDivisionError):
    pass


class DivisionByZeroPoly(InvalidInput, ZeroDivisionError):
    pass


class NotProperFraction(InvalidInput):
    pass


class InvalidDegree(InvalidInput):
    pass


# netcore
class InvalidIndex(InvalidInput):
    pass


class ShapeMismatch(InvalidInput):
    pass


class InterlaceArity(InvalidInput):
    pass


class InterlaceShape(InvalidInput):
    pass


class SearchSpaceTooLarge(ResourceGuardError):
    pass


# constructions
class InvalidDimension(InvalidInput):
    pass


class DimensionUnsupported(InvalidInput):
    pass


class DegreeTooLarge(InvalidInput):
    pass


class CriterionDiverges(InvalidInput):
    pass


# walsh
class ResolutionTooLarge(ResourceGuardError):
    pass


# analysis
class DegreeUnsupported(InvalidInput):
    pass


class EmptyPointSet(InvalidInput):
    pass


class ProblemTooLarge(ResourceGuardError):
    pass


class UnknownIntegrand(InvalidInput, KeyError):
    pass
