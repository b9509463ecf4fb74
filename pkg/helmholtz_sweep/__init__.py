"""Recursive moving-PML sweeping preconditioner for the 3D Helmholtz equation."""
from __future__ import annotations

__version__ = "1.0.0"

from .exceptions import (  # noqa: E402
    ConfigurationError,
    DimensionError,
    FactorizationError,
    FieldFormatError,
    HelmholtzSweepError,
)
from .krylov import SolveReport, gmres  # noqa: E402
from .media import (  # noqa: E402
    Grid3D,
    PmlProfile,
    SourceField,
    VelocityField,
    make_source,
    make_velocity,
)
from .stencil import StencilCoefficients, assemble  # noqa: E402
from .sweep import (  # noqa: E402
    InnerSweepPreconditioner,
    NonRecursiveSweepPreconditioner,
    RecursiveSweepPreconditioner,
    SweepConfig,
    setup_nonrecursive,
    setup_recursive,
)

__all__ = [
    "ConfigurationError",
    "DimensionError",
    "FactorizationError",
    "FieldFormatError",
    "Grid3D",
    "HelmholtzSweepError",
    "InnerSweepPreconditioner",
    "NonRecursiveSweepPreconditioner",
    "PmlProfile",
    "RecursiveSweepPreconditioner",
    "SolveReport",
    "SourceField",
    "StencilCoefficients",
    "SweepConfig",
    "VelocityField",
    "assemble",
    "gmres",
    "make_source",
    "make_velocity",
    "setup_nonrecursive",
    "setup_recursive",
]
