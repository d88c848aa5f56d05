"""Exception types shared across the package."""

from __future__ import annotations


class LawvereError(Exception):
    """Base class for every error raised by this package."""


class MalformedTermError(LawvereError, ValueError):
    pass


class CompositionError(LawvereError, ValueError):
    pass


class IncompleteMorphismError(LawvereError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class EvaluationError(LawvereError, ValueError):
    pass


class TableShapeError(LawvereError, ValueError):
    pass


class SizeMismatchError(LawvereError, ValueError):
    pass


class MissingAlgebraError(LawvereError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class BoundExceeded(LawvereError):
    """A search gave up after exhausting its configured budget.

    ``stats`` holds whatever counters the search kept (nodes visited,
    classes found, ...) so callers can report how far it got.
    """

    def __init__(self, message: str, **stats):
        super().__init__(message)
        self.stats = stats


class InvalidMorphismError(LawvereError):
    """A theory morphism does not send axioms to valid equations."""

    def __init__(self, message: str, counterexample=None):
        super().__init__(message)
        self.counterexample = counterexample
