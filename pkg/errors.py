"""
Exception hierarchy shared by every module.

Library code raises these; the suite runner and the CLI catch ``PoincareError``
per scenario or per command so that one failure never stops a batch.
"""

from typing import Any


class PoincareError(Exception):
    pass


class InvalidInputError(PoincareError, ValueError):
    pass


class ConfigurationError(PoincareError, ValueError):
    pass


class DomainError(PoincareError, ValueError):
    pass


class InvariantViolationError(PoincareError):
    pass


class PreconditionError(PoincareError, ValueError):
    pass


class DegenerateInputError(PoincareError, ValueError):
    pass


class AccuracyError(PoincareError):
    pass


class BudgetError(PoincareError):
    pass


class SlicingError(PoincareError):
    """Raised when max_depth is reached; ``pieces`` holds the partial decomposition."""

    def __init__(self, message: str, pieces: list[Any], offending: list[Any]) -> None:
        super().__init__(message)
        self.pieces = pieces
        self.offending = offending


class ConfigParseError(PoincareError, ValueError):
    def __init__(self, key_path: str, message: str) -> None:
        super().__init__(f"{key_path}: {message}")
        self.key_path = key_path


class OutputError(PoincareError, OSError):
    pass
