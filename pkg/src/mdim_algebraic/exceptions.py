"""
Custom exceptions for mdim-algebraic.

This module defines a hierarchy of exceptions for errors raised while
parsing system spec files, running exact linear algebra, validating
endomorphisms and towers, and writing reports.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Sequence


class MdimError(Exception):
    """Base exception for all mdim-algebraic errors.

    All custom exceptions in this module inherit from this class,
    allowing callers to catch every engine error with a single handler.

    Attributes:
        message: A human-readable description of the error.
        details: Optional additional details about the error.
    """

    def __init__(self, message: str, details: str | None = None) -> None:
        """Initialize the exception.

        Args:
            message: A human-readable description of the error.
            details: Optional additional details about the error.
        """
        self.message = message
        self.details = details
        super().__init__(self._format_message())

    def _format_message(self) -> str:
        """Format the exception message."""
        if self.details:
            return f"{self.message}: {self.details}"
        return self.message


class SpecParseError(MdimError):
    """Exception raised when a system spec file cannot be parsed.

    Raised for TOML syntax errors as well as schema errors such as a
    missing table, a matrix with the wrong shape or a repeated support
    index.

    Attributes:
        message: Description of the parsing error.
        line_number: The line number where the error occurred (if available).
        column: The column where the error occurred (if available).
        key: The dotted key being validated (if available).
    """

    def __init__(
        self,
        message: str,
        line_number: int | None = None,
        column: int | None = None,
        key: str | None = None,
    ) -> None:
        """Initialize the parse error.

        Args:
            message: Description of the parsing error.
            line_number: The line number where the error occurred.
            column: The column where the error occurred.
            key: The dotted key being validated.
        """
        self.line_number = line_number
        self.column = column
        self.key = key
        parts: list[str] = []
        if line_number is not None:
            location = f"line {line_number}"
            if column is not None:
                location += f", column {column}"
            parts.append(location)
        if key:
            parts.append(f"key '{key}'")
        super().__init__(message, "; ".join(parts) or None)


class DimensionMismatchError(MdimError):
    """Exception raised when matrix or vector shapes do not agree."""

    pass


class InvalidElementError(MdimError):
    """Exception raised when an element does not belong to its carrier."""

    pass


class InvariantViolationError(MdimError):
    """Base exception for violated mathematical contracts.

    The command-line interface maps every subclass to exit code 2.
    """

    pass


class NotEndomorphismError(InvariantViolationError):
    """Exception raised when a matrix does not preserve the relation lattice."""

    pass


class InvalidTowerError(InvariantViolationError):
    """Exception raised when a connecting map of a tower is invalid.

    Attributes:
        message: Description of the failed check.
        level: Index of the offending connecting map (level n+1 to level n).
    """

    def __init__(self, message: str, level: int) -> None:
        """Initialize the tower error.

        Args:
            message: Description of the failed check.
            level: Index of the offending connecting map.
        """
        self.level = level
        super().__init__(message, f"connecting map {level} (level {level + 1} -> level {level})")


class RankCertificationError(InvariantViolationError):
    """Exception raised when the modular and exact rank paths disagree."""

    pass


class BudgetExceededError(MdimError):
    """Exception raised when a computation runs out of its time budget.

    Attributes:
        message: Description of the exhausted budget.
        partial: The rank sequence computed before the budget ran out.
    """

    def __init__(self, message: str, partial: Sequence[int] = ()) -> None:
        """Initialize the budget error.

        Args:
            message: Description of the exhausted budget.
            partial: The rank sequence computed so far.
        """
        self.partial = list(partial)
        super().__init__(message, f"{len(self.partial)} terms computed")


class ReportWriteError(MdimError):
    """Exception raised when writing a report fails.

    This exception is raised on I/O errors while emitting JSON, CSV or
    text reports.
    """

    pass
