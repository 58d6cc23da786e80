"""Exception types shared across the package."""


class SizeLimitError(ValueError):
    """A size cap (attribute count, dense power-set limit) was exceeded."""


class UnsupportedRepresentationError(TypeError):
    """An operation received a game representation it cannot work on."""


class BudgetError(ValueError):
    """A coalition budget is outside the valid range."""


class NumericInputError(ValueError):
    """Non-finite values reached a numeric routine."""


class IngestionError(ValueError):
    """A dataset file could not be parsed; carries row/column position."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class FitError(RuntimeError):
    """A built-in model could not be fit (e.g. singular design)."""


class ModelTransportError(RuntimeError):
    """Failure while talking to an external model over the wire protocol."""


class HandshakeError(ModelTransportError):
    """The server did not complete the hello/ready handshake."""


class FrameError(ModelTransportError):
    """A malformed or unexpected frame arrived on the wire."""


class PredictionCountError(ModelTransportError):
    """A prediction frame's value count or id did not match the request."""


class TransportTimeout(ModelTransportError):
    """The server did not answer within the configured timeout."""
