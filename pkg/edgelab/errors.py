"""
Exception types shared by every edgelab package.

Validation problems are ValueErrors so callers that only know the built-in
hierarchy still catch them; runtime misuse is a RuntimeError.
"""
from typing import Optional


class InvalidInputError(ValueError):
    """An argument, file or configuration value failed validation."""


class DisconnectedGraphError(InvalidInputError):
    """Rejection sampling never produced a connected graph."""

    def __init__(self, generator: str, retries: int):
        self.generator = generator
        self.retries = retries
        super().__init__(
            f"Generator '{generator}' produced no connected graph after {retries} retries"
        )


class IngestionError(InvalidInputError):
    """A ratings file line could not be parsed."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(prefix + message)


class UnknownTargetError(InvalidInputError):
    """The requested target movie does not exist or has no ratings."""

    def __init__(self, target: int, candidates: list[int]):
        self.target = target
        self.candidates = candidates
        super().__init__(
            f"Unknown target movie {target}. Most rated candidates: {candidates}"
        )


class UsageError(RuntimeError):
    """An API was called out of order (e.g. backward before forward)."""


class NumericalCheckError(RuntimeError):
    """An identity that must hold to rounding error did not."""


class BoundViolationError(RuntimeError):
    """Empirical deviation exceeded the theoretical bound in strict mode."""

    def __init__(self, violations: int):
        self.violations = violations
        super().__init__(f"{violations} bound violation(s) recorded")
