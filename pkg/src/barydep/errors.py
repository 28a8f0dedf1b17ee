"""Exception types shared across the package."""


class BarydepError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(BarydepError, ValueError):
    """Malformed input: non-finite entries, empty arrays, bad configuration."""


class DimensionMismatch(InvalidInput):
    """Operands have incompatible shapes."""


class NotColumnStochastic(InvalidInput):
    """Matrix entries leave [0, 1] or columns do not sum to one within tolerance."""


class InsufficientData(InvalidInput):
    """Too few time steps for the requested lag or fit."""


class DegenerateShape(InvalidInput):
    """Operation undefined for this shape (e.g. row variance of a single column)."""


class DegenerateInput(InvalidInput):
    """Data degenerate for the requested statistic (e.g. a zero-variance row)."""


class DivergenceDetected(BarydepError, RuntimeError):
    """A generated trajectory left its admissible range."""


class ParseError(BarydepError, ValueError):
    """A CSV cell could not be parsed; carries the offending 1-based row number."""

    def __init__(self, message: str, row: int):
        super().__init__(f"row {row}: {message}")
        self.row = row


class SchemaError(BarydepError, ValueError):
    """A required column is missing or the schema itself is malformed."""


class EmptySelection(BarydepError, ValueError):
    """A frame filter matched nothing."""


class IoError(BarydepError, OSError):
    """Report files could not be written."""
