"""Exception hierarchy shared by every module."""


class ResilimatError(Exception):
    pass


class InputError(ResilimatError, ValueError):
    """Malformed or out-of-range input (bad element id, bad descriptor, ...)."""


class ContractError(ResilimatError):
    """A documented pre/post-condition was violated at run time."""


class GuardExceeded(ResilimatError):
    """An exhaustive computation would exceed its configured size limit."""

    def __init__(self, message: str, estimate: int | None = None):
        super().__init__(message)
        self.estimate = estimate


class UndefinedCurvatureError(ResilimatError):
    """Curvature is undefined because every singleton has zero value."""
