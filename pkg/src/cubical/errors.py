"""Exception hierarchy shared by every module."""


class CubicalError(Exception):
    """Base class for all errors raised by this package."""


class PreconditionError(CubicalError, ValueError):
    """An input violates the documented precondition of an operation."""


class UnsupportedShapeError(PreconditionError):
    """The operation has no exact predicate or sampler for this shape kind."""


class ToleranceError(CubicalError):
    """A numerical estimate could not reach the requested accuracy."""

    def __init__(self, message, achievable=None):
        super().__init__(message)
        self.achievable = achievable
