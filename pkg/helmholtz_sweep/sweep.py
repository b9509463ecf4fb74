"""Moving-PML sweeping preconditioners.

The outer sweep walks layer groups along x3 and the inner sweep walks
layer groups of each quasi-2D slab along x2. Each step solves a
subproblem holding a group's own layers plus a thin auxiliary PML on the
side of the layers already swept, then hands the facing layer on to the
next group. In exact mode the auxiliary PML is replaced by everything
behind the front, which turns the sweep into an exact block LDU solve.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.sparse.linalg import LinearOperator

from .const import (
    DEFAULT_AUX_PML_LAYERS,
    DEFAULT_DENSE_THRESHOLD,
    DEFAULT_FRONTS,
    DEFAULT_GROUP_SIZE,
    FRONTS,
    FRONTS_TWO,
    MODE_APPROXIMATE,
    MODE_EXACT,
    MODES,
)
from .direct import factor_exact, factor_quasi1d
from .exceptions import ConfigurationError, DimensionError, FactorizationError
from .media import PmlProfile
from .stencil import (
    StencilCoefficients,
    SubproblemSpec,
    SweepPlan,
    as_field,
    couple,
    extract_inner,
    extract_outer,
    plan_groups,
)

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepConfig:
    """Tiling and PML settings shared by the outer and inner sweeps."""

    pml: PmlProfile
    aux_layers: int = DEFAULT_AUX_PML_LAYERS
    group_size: int = DEFAULT_GROUP_SIZE
    fronts: str = DEFAULT_FRONTS
    mode: str = MODE_APPROXIMATE
    dense_threshold: int = DEFAULT_DENSE_THRESHOLD

    def __post_init__(self) -> None:
        """Validate the settings."""
        if self.fronts not in FRONTS:
            raise ConfigurationError(f"fronts must be one of {FRONTS}")
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}")
        if self.group_size < 1:
            raise ConfigurationError("group size must be at least 1")
        if self.mode == MODE_APPROXIMATE and self.aux_layers < 1:
            raise ConfigurationError("auxiliary PML needs at least 1 layer")

    @property
    def boundary_layers(self) -> int:
        """Layers of the boundary PML, also the size of the boundary blocks."""
        return self.pml.b

    @property
    def exact(self) -> bool:
        """True when every subproblem keeps the full region behind its front."""
        return self.mode == MODE_EXACT

    @property
    def two_front(self) -> bool:
        """True when sweeping from both ends of each axis."""
        return self.fronts == FRONTS_TWO


def _slab(axis: int, start: int, stop: int) -> tuple[slice, ...]:
    index = [slice(None)] * 3
    index[axis] = slice(start, stop)
    return tuple(index)


class SweepPreconditioner:
    """Block sweep along one axis with one solver per subproblem."""

    axis = 2
    kind = "sweep"

    def __init__(self, coeffs: StencilCoefficients, config: SweepConfig) -> None:
        """Initialize the preconditioner and factorize every subproblem."""
        self.coeffs = coeffs
        self.config = config
        self.plan: SweepPlan = plan_groups(
            self.axis,
            coeffs.shape[self.axis],
            config.boundary_layers,
            config.group_size,
            config.aux_layers,
            config.fronts,
            config.exact,
        )
        self._solvers: dict[SubproblemSpec, Any] = {}
        for index, spec in enumerate(self.plan.specs):
            try:
                self._solvers[spec] = self._build(spec)
            except FactorizationError as err:
                raise err.with_subproblem(index) from err

    def _build(self, spec: SubproblemSpec) -> Any:
        raise NotImplementedError

    @property
    def shape(self) -> tuple[int, int, int]:
        """Shape of the fields the preconditioner acts on."""
        return self.coeffs.shape

    @property
    def subproblem_count(self) -> int:
        """Number of subproblems swept along this preconditioner's axis."""
        return len(self.plan)

    @property
    def nbytes(self) -> int:
        """Memory held by all subproblem factorizations."""
        return sum(solver.nbytes for solver in self._solvers.values())

    def solver(self, spec: SubproblemSpec) -> Any:
        """Factorization or nested preconditioner of one subproblem."""
        return self._solvers[spec]

    def _transfer(self, spec: SubproblemSpec, alpha: np.ndarray) -> np.ndarray:
        """Solve the subproblem with alpha on its owned layers, keep those layers."""
        low, high = spec.region
        shape = list(self.shape)
        shape[self.axis] = high - low
        owned = _slab(self.axis, spec.owned.start, spec.owned.stop)
        rhs = np.zeros(shape, dtype=complex)
        rhs[owned] = alpha
        return self._solvers[spec].solve(rhs)[owned]

    def apply(self, f: np.ndarray) -> np.ndarray:
        """Return u approximating A^-1 f for a field or flat vector."""
        f, flat = as_field(f, self.shape)
        axis = self.axis
        coeffs = self.coeffs
        plan = self.plan
        u = np.zeros(self.shape, dtype=complex)

        def owned(spec: SubproblemSpec) -> tuple[slice, ...]:
            return _slab(axis, spec.start, spec.stop)

        for chain in plan.chains:
            previous = None
            for spec in chain:
                rhs = f[owned(spec)]
                if previous is not None:
                    rhs = rhs - couple(coeffs, previous, spec, u[owned(previous)])
                u[owned(spec)] = self._transfer(spec, rhs)
                previous = spec

        terminal = plan.terminal
        rhs = f[owned(terminal)].astype(complex)
        for chain in plan.chains:
            rhs -= couple(coeffs, chain[-1], terminal, u[owned(chain[-1])])
        u[owned(terminal)] = self._transfer(terminal, rhs)

        for chain in plan.chains:
            following = terminal
            for spec in reversed(chain):
                coupling = couple(coeffs, following, spec, u[owned(following)])
                u[owned(spec)] -= self._transfer(spec, coupling)
                following = spec

        return u.ravel(order="F") if flat else u

    solve = apply

    def as_linear_operator(self) -> LinearOperator:
        """Wrap apply as a flat-vector scipy linear operator."""
        size = self.coeffs.size
        return LinearOperator(
            (size, size), matvec=lambda x: self.apply(np.ravel(x)), dtype=complex
        )


class InnerSweepPreconditioner(SweepPreconditioner):
    """Sweep along x2 of a quasi-2D slab with quasi-1D subproblems."""

    axis = 1
    kind = "inner"

    def _build(self, spec: SubproblemSpec) -> Any:
        sub = extract_inner(self.coeffs, spec, self.config.pml)
        return factor_quasi1d(sub)


class RecursiveSweepPreconditioner(SweepPreconditioner):
    """Sweep along x3 whose quasi-2D subproblems are themselves swept along x2."""

    kind = "recursive"

    def _build(self, spec: SubproblemSpec) -> Any:
        sub = extract_outer(self.coeffs, spec, self.config.pml)
        return InnerSweepPreconditioner(sub, self.config)

    @property
    def inner_subproblem_count(self) -> int:
        """Quasi-1D subproblems across all outer subproblems."""
        return sum(pc.subproblem_count for pc in self._solvers.values())


class NonRecursiveSweepPreconditioner(SweepPreconditioner):
    """Sweep along x3 with exact factorizations of the quasi-2D subproblems."""

    kind = "nonrecursive"

    def _build(self, spec: SubproblemSpec) -> Any:
        sub = extract_outer(self.coeffs, spec, self.config.pml)
        return factor_exact(sub, self.config.dense_threshold)


def setup_inner(quasi2d: StencilCoefficients, cfg: SweepConfig) -> InnerSweepPreconditioner:
    """Factorize every quasi-1D subproblem of a quasi-2D slab."""
    return InnerSweepPreconditioner(quasi2d, cfg)


def apply_inner(
    pc: InnerSweepPreconditioner, coeffs: StencilCoefficients, g: np.ndarray
) -> np.ndarray:
    """Approximate the quasi-2D solve by one inner sweep."""
    _check_owner(pc, coeffs)
    return pc.apply(g)


def setup_recursive(
    coeffs: StencilCoefficients, cfg: SweepConfig
) -> RecursiveSweepPreconditioner:
    """Build the recursive preconditioner of the full problem."""
    cfg.pml.validate_for_sweep(cfg.two_front)
    pc = RecursiveSweepPreconditioner(coeffs, cfg)
    _LOGGER.info(
        "Recursive sweep ready: %d outer and %d inner subproblems, %d bytes",
        pc.subproblem_count,
        pc.inner_subproblem_count,
        pc.nbytes,
    )
    return pc


def apply_recursive(
    pc: RecursiveSweepPreconditioner, coeffs: StencilCoefficients, f: np.ndarray
) -> np.ndarray:
    """Apply the recursive preconditioner once."""
    _check_owner(pc, coeffs)
    return pc.apply(f)


def setup_nonrecursive(
    coeffs: StencilCoefficients, cfg: SweepConfig
) -> NonRecursiveSweepPreconditioner:
    """Build the sweep with exact quasi-2D solves."""
    if not cfg.pml.has_face("x3_low"):
        raise ConfigurationError("sweeping along x3 requires PML on face x3_low")
    pc = NonRecursiveSweepPreconditioner(coeffs, cfg)
    _LOGGER.info(
        "Non-recursive sweep ready: %d subproblems, %d bytes",
        pc.subproblem_count,
        pc.nbytes,
    )
    return pc


def apply_nonrecursive(
    pc: NonRecursiveSweepPreconditioner, coeffs: StencilCoefficients, f: np.ndarray
) -> np.ndarray:
    """Apply the non-recursive preconditioner once."""
    _check_owner(pc, coeffs)
    return pc.apply(f)


def _check_owner(pc: SweepPreconditioner, coeffs: StencilCoefficients) -> None:
    if pc.shape != coeffs.shape:
        raise DimensionError(
            f"preconditioner built for shape {pc.shape}, operator has {coeffs.shape}"
        )
