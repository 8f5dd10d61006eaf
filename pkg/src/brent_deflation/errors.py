"""Exception hierarchy shared across the package."""


class DeflationError(Exception):
    """Base class for all errors raised by this package."""


class InputError(DeflationError, ValueError):
    """Dimension mismatch or otherwise malformed argument."""


class NotASolutionError(DeflationError, ValueError):
    """The supplied point does not satisfy the system to the required tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NumericalError(DeflationError, RuntimeError):
    """An SVD, QR or bordered solve failed or produced an unacceptable residual."""


class DegenerateInputError(NumericalError):
    """The bordered matrix stayed rank deficient after every retry."""


class UnsupportedDegreeError(DeflationError, NotImplementedError):
    """Structured derivative actions were requested beyond what the base degree allows."""


class ParseError(DeflationError, ValueError):
    """A text or JSON input could not be parsed."""


class SchemaError(ParseError):
    """A parsed document has inconsistent dimensions or missing fields."""
