"""
Exception hierarchy for fna_sensitivity.

Every error raised on purpose by the package derives from :class:`FnaError`
so that the CLI can turn it into a machine-readable error object.
"""
from __future__ import annotations

from typing import Any, Dict, Optional


class FnaError(Exception):
    """Base class for all package errors."""

    def to_dict(self) -> Dict[str, Any]:
        return {"type": type(self).__name__, "message": str(self)}


class InvalidInput(FnaError, ValueError):
    """A domain object was constructed with values violating its invariants."""


class InfeasibleRho(FnaError):
    """A correlation value (or interval) lies outside the feasible range."""


class DegenerateMarginal(FnaError):
    """A marginal probability is 0 or 1, so the correlation is undefined."""


class NotApplicable(FnaError):
    """The requested quantity is not defined for the given marginals."""


class EmptyFeasibleSet(FnaError):
    """The requested correlation interval has no feasible point."""


class SeparationDetected(FnaError):
    """Logistic coefficients diverge; the maximum-likelihood fit does not exist."""


class FoldDegenerate(FnaError):
    """A cross-fitting training complement lacks a treatment arm or label value."""

    def __init__(self, message: str, replication: Optional[int] = None) -> None:
        self.detail = message
        self.replication = replication
        if replication is not None:
            message = f"replication {replication}: {message}"
        super().__init__(message)

    def __reduce__(self):
        return type(self), (self.detail, self.replication)

    def to_dict(self) -> Dict[str, Any]:
        d = super().to_dict()
        d["replication"] = self.replication
        return d


class MisalignedFit(FnaError):
    """Nuisance predictions (or a policy vector) do not match the dataset."""


class ConfigError(FnaError):
    """A run configuration failed validation."""


class ParseError(FnaError):
    """A CSV cell could not be parsed as a number."""

    def __init__(self, message: str, row: int, column: int) -> None:
        super().__init__(f"row {row}, column {column}: {message}")
        self.row = row
        self.column = column

    def to_dict(self) -> Dict[str, Any]:
        d = super().to_dict()
        d.update(row=self.row, column=self.column)
        return d


class SchemaError(FnaError):
    """A CSV file is missing required columns or carries invalid values."""

    def __init__(
        self,
        message: str,
        row: Optional[int] = None,
        column: Optional[int] = None,
    ) -> None:
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.row = row
        self.column = column

    def to_dict(self) -> Dict[str, Any]:
        d = super().to_dict()
        d.update(row=self.row, column=self.column)
        return d


class OutputError(FnaError):
    """A report or table could not be written to the requested output."""
