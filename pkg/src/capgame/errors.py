"""Exception hierarchy.

Validation failures derive from :class:`ValidationError` (CLI exit code 1);
resource guards derive from :class:`ResourceLimitError` (CLI exit code 2).
"""


class CapgameError(Exception):
    """Base class for all errors raised by capgame."""


class ValidationError(CapgameError, ValueError):
    """Input violates a documented invariant."""


class ResourceLimitError(CapgameError):
    """A computation was refused because it exceeds a size guard."""


class NotNormalized(ValidationError):
    pass


class NotMonotone(ValidationError):
    def __init__(self, message, smaller=None, larger=None):
        super().__init__(message)
        self.smaller = smaller
        self.larger = larger


class OutOfRange(ValidationError):
    pass


class IndexOutOfRange(ValidationError):
    pass


class BadWeights(ValidationError):
    pass


class GroundMismatch(ValidationError):
    pass


class ValueOutOfUnitInterval(ValidationError):
    pass


class BadStep(ValidationError):
    pass


class FormatError(ValidationError):
    """A file does not follow its documented format."""


class NotIntersectionStable(ValidationError):
    def __init__(self, message, first=None, second=None):
        super().__init__(message)
        self.first = first
        self.second = second


class MissingSingleton(ValidationError):
    pass


class MissingTrivial(ValidationError):
    pass


class GroundTooLarge(ResourceLimitError):
    pass


class ProductTooLarge(ResourceLimitError):
    pass


class FamilyTooLarge(ResourceLimitError):
    pass


class GridTooLarge(ResourceLimitError):
    pass


class SearchTooLarge(ResourceLimitError):
    pass
