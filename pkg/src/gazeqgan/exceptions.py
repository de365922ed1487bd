"""Exception types raised across the package."""


class ConfigurationError(ValueError):
    """Invalid configuration or argument combination."""


class ShapeError(ValueError):
    """Array lengths or shapes disagree with the configuration."""


class DomainError(ValueError):
    """A value lies outside the mathematical domain of an operation."""


class NumericError(ArithmeticError):
    """A non-finite value appeared during a computation."""


class TapeStateError(RuntimeError):
    """An autodiff tape was used after its reverse sweep consumed it."""


class ParseError(ValueError):
    """A checkpoint or data file is malformed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DataError(ValueError):
    """Input data cannot support the requested operation."""


class SchemaError(DataError):
    """An input file does not follow the expected column schema."""


class DegenerateDataError(DataError):
    """Data has zero spread where a positive spread is required."""


class OutOfSupportError(DomainError):
    """A density query falls where the estimated marginal vanishes."""
