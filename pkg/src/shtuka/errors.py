"""Exception types shared across the package."""


class ShtukaError(Exception):
    """Base class for all package errors."""


class ParameterError(ShtukaError):
    """Invalid construction parameters (bad q, reducible modulus, ...)."""


class DomainError(ShtukaError):
    """Operation applied outside its mathematical domain."""


class PrecisionError(ShtukaError):
    """Requested result is not determined at the working precision."""

    def __init__(self, message, achievable=None):
        super().__init__(message)
        self.achievable = achievable


class VerificationError(ShtukaError):
    """An identity check failed where the caller demanded success."""
