"""Exception hierarchy shared across the pipeline, CLI, and HTTP service."""


class PrimeError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(PrimeError):
    """Bad user-supplied parameters (filters, split fractions, unknown names).

    CLI exit code 2; HTTP 422.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class SchemaError(PrimeError):
    """Input file does not conform to the documented schema. CLI exit code 3."""


class DataError(PrimeError):
    """Input data is structurally valid but semantically unusable. CLI exit code 3."""


class StepOrderError(PrimeError):
    """A workflow step was requested before its prerequisite completed. HTTP 409."""
