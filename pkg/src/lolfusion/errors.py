"""Exception hierarchy.

Validation problems derive from ``ValueError`` so callers that only care about
"bad input" can catch that; numerical failures derive from ``ArithmeticError``.
"""


class LolFusionError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(LolFusionError, ValueError):
    """An argument is out of its documented domain (negative, non-finite...)."""


class EmptyInputError(InvalidInputError):
    pass


class ShapeError(InvalidInputError):
    """Series lengths or feature dimensions do not line up."""


class ConfigError(InvalidInputError):
    pass


class SchemaError(InvalidInputError):
    """A CSV/JSON document is missing a required column or field."""


class ParseError(InvalidInputError):
    """A row of an input file could not be parsed or failed validation."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateDataError(LolFusionError, ArithmeticError):
    """Training data carries no usable information (e.g. all rows identical)."""


class DivergenceError(LolFusionError, ArithmeticError):
    """Training produced a non-finite loss."""

    def __init__(self, message: str, epoch: int | None = None):
        self.epoch = epoch
        if epoch is not None:
            message = f"epoch {epoch}: {message}"
        super().__init__(message)
