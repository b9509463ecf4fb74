"""Exceptions raised by the Helmholtz sweeping preconditioner package."""
from __future__ import annotations


class HelmholtzSweepError(Exception):
    """Base class for all package errors."""


class ConfigurationError(HelmholtzSweepError, ValueError):
    """Invalid configuration or parameters."""


class DimensionError(HelmholtzSweepError, ValueError):
    """Mismatched sizes, shapes or layer ranges."""


class FieldFormatError(HelmholtzSweepError, ValueError):
    """Malformed HSW1 field file."""


class FactorizationError(HelmholtzSweepError, ArithmeticError):
    """A factorization met a singular or non-finite pivot."""

    def __init__(
        self,
        message: str,
        block: int | None = None,
        subproblem: int | None = None,
    ) -> None:
        """Initialize with the failing block and subproblem indices."""
        super().__init__(message)
        self.block = block
        self.subproblem = subproblem

    def with_subproblem(self, subproblem: int) -> FactorizationError:
        """Return a copy tagged with the index of the failing subproblem."""
        return FactorizationError(
            f"subproblem {subproblem}: {self}",
            block=self.block,
            subproblem=subproblem,
        )
