class QaskitError(Exception):
    """Base class for all library errors."""


class StructureError(QaskitError, ValueError):
    """Malformed or invalid access structure input."""


class SizeLimitError(QaskitError):
    """An operation would exceed a configured size bound."""


class PivotError(QaskitError):
    """No admissible pivot for a structural step."""

    def __init__(self, message: str, tried: list | None = None):
        super().__init__(message)
        self.tried = list(tried or [])
