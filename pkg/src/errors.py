from typing import Optional


class ToricError(Exception):
    """Base class for every error raised by the library."""


class InvalidArgumentError(ToricError, ValueError):
    pass


class InvalidFanError(ToricError):
    pass


class UnknownConeError(ToricError, KeyError):
    pass


class DimensionMismatchError(ToricError, ValueError):
    pass


class ClassMapError(ToricError):
    """Raised when explicit class data does not give a surjective class map."""


class FanRequiredError(ToricError):
    """Raised when a fan-only operation is called on an explicit grading."""


class UnitIdealError(ToricError, ValueError):
    pass


class AmbientMismatchError(ToricError):
    pass


class HomogeneityError(ToricError, ValueError):
    pass


class MinorBoundError(ToricError):
    pass


class NotInDualConeError(ToricError, ValueError):
    pass


class DocumentError(ToricError):
    def __init__(self, message: str, location: Optional[str] = None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)
