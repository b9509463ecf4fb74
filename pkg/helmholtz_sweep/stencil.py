"""Seven-point discretization of the PML Helmholtz operator.

Fields are arrays indexed ``[x1, x2, x3]``; flattened vectors use Fortran
order so that x1 runs fastest. Every neighbor coupling along an axis is
stored as a full-size array, zero where the neighbor lies outside the
array (the implicit Dirichlet ghost plane).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .const import (
    FRONT_BOTH,
    FRONT_BOUNDARY,
    FRONT_HIGH,
    FRONT_LOW,
    FRONTS_ONE,
    FRONTS_TWO,
)
from .exceptions import ConfigurationError, DimensionError
from .media import Grid3D, PmlProfile, VelocityField

_LOGGER = logging.getLogger(__name__)


def _along(values: np.ndarray, axis: int) -> np.ndarray:
    """Reshape a 1-D array to broadcast along one axis of a 3-D field."""
    shape = [1, 1, 1]
    shape[axis] = len(values)
    return values.reshape(shape)


def _slab(axis: int, start: int | None, stop: int | None) -> tuple[slice, ...]:
    index = [slice(None)] * 3
    index[axis] = slice(start, stop)
    return tuple(index)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


def as_field(u: np.ndarray, shape: tuple[int, ...]) -> tuple[np.ndarray, bool]:
    """View a field or x1-fastest flat vector as a field of the given shape.

    Returns the field and whether the input was flat.
    """
    u = np.asarray(u)
    size = int(np.prod(shape))
    if u.ndim == 1:
        if u.size != size:
            raise DimensionError(f"vector of size {u.size}, expected {size}")
        return u.reshape(shape, order="F"), True
    if u.shape != tuple(shape):
        raise DimensionError(f"field of shape {u.shape}, expected {tuple(shape)}")
    return u, False


@dataclass(frozen=True, eq=False)
class AxisStretch:
    """Stretching values along one axis at nodes and half-integer points.

    ``halves[k]`` sits between node k-1 and node k, so there is one more
    half value than nodes.
    """

    nodes: np.ndarray
    halves: np.ndarray

    def __post_init__(self) -> None:
        """Validate the lengths."""
        if len(self.halves) != len(self.nodes) + 1:
            raise DimensionError(
                f"{len(self.nodes)} nodes need {len(self.nodes) + 1} half values, "
                f"got {len(self.halves)}"
            )
        object.__setattr__(self, "nodes", _frozen(np.array(self.nodes, dtype=complex)))
        object.__setattr__(self, "halves", _frozen(np.array(self.halves, dtype=complex)))

    def __len__(self) -> int:
        return len(self.nodes)

    def window(self, start: int, stop: int) -> AxisStretch:
        """Stretching over nodes [start, stop)."""
        return AxisStretch(self.nodes[start:stop], self.halves[start : stop + 1])


@dataclass(frozen=True, eq=False)
class StencilCoefficients:
    """Coefficient arrays of the operator on a box of nodes.

    ``lower[a]`` multiplies the neighbor one step down axis a and
    ``upper[a]`` the neighbor one step up.
    """

    h: float
    omega: float
    k2: np.ndarray
    stretches: tuple[AxisStretch, AxisStretch, AxisStretch]
    center: np.ndarray
    lower: tuple[np.ndarray, np.ndarray, np.ndarray]
    upper: tuple[np.ndarray, np.ndarray, np.ndarray]

    @classmethod
    def from_stretches(
        cls,
        h: float,
        omega: float,
        k2: np.ndarray,
        stretches: tuple[AxisStretch, AxisStretch, AxisStretch],
    ) -> StencilCoefficients:
        """Build the coefficients of a Dirichlet-closed box."""
        k2 = np.asarray(k2, dtype=float)
        if k2.ndim != 3 or tuple(len(s) for s in stretches) != k2.shape:
            raise DimensionError(
                f"stretch lengths {[len(s) for s in stretches]} do not match "
                f"field shape {k2.shape}"
            )
        shape = k2.shape
        center = k2.astype(complex)
        lower = []
        upper = []
        for axis, stretch in enumerate(stretches):
            node = _along(stretch.nodes, axis)
            lo = np.broadcast_to(node * _along(stretch.halves[:-1], axis) / h**2, shape)
            hi = np.broadcast_to(node * _along(stretch.halves[1:], axis) / h**2, shape)
            center = center - lo - hi
            lo = lo.copy()
            hi = hi.copy()
            lo[_slab(axis, 0, 1)] = 0
            hi[_slab(axis, shape[axis] - 1, None)] = 0
            lower.append(_frozen(lo))
            upper.append(_frozen(hi))

        return cls(
            h=h,
            omega=omega,
            k2=_frozen(k2.copy()),
            stretches=tuple(stretches),
            center=_frozen(center),
            lower=tuple(lower),
            upper=tuple(upper),
        )

    @property
    def shape(self) -> tuple[int, int, int]:
        """Node counts along x1, x2, x3."""
        return self.center.shape

    @property
    def size(self) -> int:
        """Number of unknowns."""
        return self.center.size

    @property
    def nbytes(self) -> int:
        """Memory held by the coefficient arrays."""
        arrays = (self.center, self.k2, *self.lower, *self.upper)
        return sum(a.nbytes for a in arrays)

    def apply(self, u: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """Return A u for a field or an x1-fastest flat vector."""
        u, flat = as_field(u, self.shape)
        if out is None:
            out = np.empty(self.size if flat else self.shape, dtype=complex)
        elif out.shape != ((self.size,) if flat else self.shape):
            raise DimensionError(f"output buffer of shape {out.shape}")
        result = out.reshape(self.shape, order="F") if flat else out

        np.multiply(self.center, u, out=result)
        for axis in range(3):
            down = _slab(axis, 1, None)
            up = _slab(axis, 0, -1)
            result[down] += self.lower[axis][down] * u[up]
            result[up] += self.upper[axis][up] * u[down]
        return out

    def to_sparse(self) -> sp.csc_matrix:
        """Assemble the operator as a sparse matrix in x1-fastest order."""
        n1, n2, _ = self.shape
        size = self.size
        diagonals = [self.center.ravel(order="F")]
        offsets = [0]
        for axis, step in enumerate((1, n1, n1 * n2)):
            if self.shape[axis] < 2:
                continue
            diagonals.append(self.upper[axis].ravel(order="F")[: size - step])
            offsets.append(step)
            diagonals.append(self.lower[axis].ravel(order="F")[step:])
            offsets.append(-step)
        return sp.diags(diagonals, offsets, shape=(size, size), format="csc")

    def restrict(self, axis: int, start: int, stop: int) -> StencilCoefficients:
        """Principal sub-block over layers [start, stop) along an axis."""
        if not 0 <= start < stop <= self.shape[axis]:
            raise DimensionError(
                f"layer range [{start}, {stop}) outside axis of length {self.shape[axis]}"
            )
        window = _slab(axis, start, stop)
        lower = [a[window].copy() for a in self.lower]
        upper = [a[window].copy() for a in self.upper]
        lower[axis][_slab(axis, 0, 1)] = 0
        upper[axis][_slab(axis, stop - start - 1, None)] = 0
        stretches = list(self.stretches)
        stretches[axis] = stretches[axis].window(start, stop)
        return StencilCoefficients(
            h=self.h,
            omega=self.omega,
            k2=_frozen(self.k2[window].copy()),
            stretches=tuple(stretches),
            center=_frozen(self.center[window].copy()),
            lower=tuple(_frozen(a) for a in lower),
            upper=tuple(_frozen(a) for a in upper),
        )


def assemble(grid: Grid3D, vel: VelocityField, pml: PmlProfile) -> StencilCoefficients:
    """Discretize the Helmholtz operator with PML stretching on the grid."""
    if vel.shape != grid.shape:
        raise ConfigurationError(
            f"velocity shape {vel.shape} does not match grid shape {grid.shape}"
        )
    nodes_x = grid.coordinates()
    halves_x = (np.arange(grid.n + 1) + 0.5) * grid.h
    stretches = tuple(
        AxisStretch(
            pml.stretch(nodes_x, axis, grid.omega),
            pml.stretch(halves_x, axis, grid.omega),
        )
        for axis in (1, 2, 3)
    )
    k2 = grid.omega**2 / vel.c**2
    coeffs = StencilCoefficients.from_stretches(grid.h, grid.omega, k2, stretches)
    _LOGGER.debug("Assembled operator with %d unknowns", coeffs.size)
    return coeffs


def apply(
    coeffs: StencilCoefficients, u: np.ndarray, out: np.ndarray | None = None
) -> np.ndarray:
    """Matrix-free product A u."""
    return coeffs.apply(u, out=out)


@dataclass(frozen=True)
class SubproblemSpec:
    """One sweep step: owned layers [start, stop) along an array axis.

    ``front`` says where the moving PML attaches: ``low`` (sweeping up from
    the low face), ``high``, ``both`` for the meeting group of a two-front
    sweep, or ``boundary`` for a block closed by the boundary PML itself.
    In exact mode the region behind the front is kept in full instead of
    being replaced by auxiliary layers.
    """

    axis: int
    start: int
    stop: int
    length: int
    front: str = FRONT_BOUNDARY
    aux_layers: int = 0
    exact: bool = False

    def __post_init__(self) -> None:
        """Validate the layer range."""
        if self.axis not in (0, 1, 2):
            raise DimensionError(f"sweep axis must be 0, 1 or 2, got {self.axis}")
        if not 0 <= self.start < self.stop <= self.length:
            raise DimensionError(
                f"layer range [{self.start}, {self.stop}) outside [0, {self.length})"
            )
        if self.front not in (FRONT_BOUNDARY, FRONT_LOW, FRONT_HIGH, FRONT_BOTH):
            raise ConfigurationError(f"unknown front: {self.front}")

    @property
    def aux_low(self) -> int:
        """Auxiliary PML layers below the owned range."""
        if self.exact or self.front not in (FRONT_LOW, FRONT_BOTH):
            return 0
        return self.aux_layers

    @property
    def aux_high(self) -> int:
        """Auxiliary PML layers above the owned range."""
        if self.exact or self.front not in (FRONT_HIGH, FRONT_BOTH):
            return 0
        return self.aux_layers

    @property
    def region(self) -> tuple[int, int]:
        """Extent of the subproblem in parent layer indices.

        Auxiliary layers may run past the parent's edges.
        """
        if self.exact:
            low = 0 if self.front in (FRONT_LOW, FRONT_BOTH) else self.start
            high = self.length if self.front in (FRONT_HIGH, FRONT_BOTH) else self.stop
            return low, high
        return self.start - self.aux_low, self.stop + self.aux_high

    @property
    def owned(self) -> slice:
        """Owned layers in subproblem-local indices."""
        low = self.region[0]
        return slice(self.start - low, self.stop - low)

    @property
    def layers(self) -> int:
        """Number of owned layers."""
        return self.stop - self.start


@dataclass(frozen=True)
class SweepPlan:
    """Tiling of one axis into sweep chains and a terminal group.

    Each chain starts at a boundary block and moves toward the terminal
    group, where the fronts meet (or the single front ends).
    """

    axis: int
    length: int
    chains: tuple[tuple[SubproblemSpec, ...], ...]
    terminal: SubproblemSpec

    @property
    def specs(self) -> list[SubproblemSpec]:
        """All subproblems, chains first, terminal last."""
        return [spec for chain in self.chains for spec in chain] + [self.terminal]

    def __len__(self) -> int:
        return sum(len(chain) for chain in self.chains) + 1


def plan_groups(
    axis: int,
    length: int,
    boundary_layers: int,
    group_size: int,
    aux_layers: int,
    fronts: str = FRONTS_TWO,
    exact: bool = False,
) -> SweepPlan:
    """Split an axis into boundary blocks and layer groups.

    The terminal group absorbs the remainder of the interior layers. Axes
    too short for one boundary block plus one group per front collapse to
    a single block covering everything.
    """
    if fronts not in (FRONTS_ONE, FRONTS_TWO):
        raise ConfigurationError(f"fronts must be '{FRONTS_ONE}' or '{FRONTS_TWO}'")
    if boundary_layers < 1 or group_size < 1 or aux_layers < 0:
        raise ConfigurationError(
            f"invalid tiling: boundary={boundary_layers}, group={group_size}, "
            f"aux={aux_layers}"
        )
    if length < 1:
        raise DimensionError(f"cannot tile an axis of length {length}")

    def spec(start: int, stop: int, front: str) -> SubproblemSpec:
        return SubproblemSpec(axis, start, stop, length, front, aux_layers, exact)

    b = boundary_layers
    ends = 1 if fronts == FRONTS_ONE else 2
    if length < ends * b + group_size:
        return SweepPlan(axis, length, (), spec(0, length, FRONT_BOUNDARY))

    interior = length - ends * b
    count = interior // group_size
    middle = count - 1 if fronts == FRONTS_ONE else count // 2
    sizes = [group_size] * count
    sizes[middle] += interior - count * group_size
    edges = np.concatenate(([b], b + np.cumsum(sizes))).tolist()
    groups = list(zip(edges[:-1], edges[1:]))

    low_chain = [spec(0, b, FRONT_BOUNDARY)]
    low_chain += [spec(lo, hi, FRONT_LOW) for lo, hi in groups[:middle]]
    if fronts == FRONTS_ONE:
        terminal = spec(*groups[middle], FRONT_LOW)
        return SweepPlan(axis, length, (tuple(low_chain),), terminal)

    high_chain = [spec(length - b, length, FRONT_BOUNDARY)]
    high_chain += [spec(lo, hi, FRONT_HIGH) for lo, hi in reversed(groups[middle + 1 :])]
    terminal = spec(*groups[middle], FRONT_BOTH)
    return SweepPlan(axis, length, (tuple(low_chain), tuple(high_chain)), terminal)


def _extract(
    coeffs: StencilCoefficients, spec: SubproblemSpec, pml: PmlProfile
) -> StencilCoefficients:
    axis = spec.axis
    length = coeffs.shape[axis]
    if spec.length != length:
        raise DimensionError(
            f"subproblem planned for length {spec.length}, operator has {length}"
        )
    low, high = spec.region
    k2 = np.take(coeffs.k2, np.clip(np.arange(low, high), 0, length - 1), axis=axis)

    parent = coeffs.stretches[axis]
    p, q = spec.aux_low, spec.aux_high
    core = parent.window(low + p, high - q)
    nodes = [core.nodes]
    halves = [core.halves]
    if p or q:
        aux = pml.with_layers(spec.aux_layers)
        h = coeffs.h
        t = np.arange(1, p + 1)
        j = np.arange(q)
        # Distances are measured from the ghost plane closing each end
        nodes = [aux.layer_stretch(t * h, coeffs.omega), *nodes,
                 aux.layer_stretch((q - j) * h, coeffs.omega)]
        halves = [aux.layer_stretch((t - 0.5) * h, coeffs.omega), *halves,
                  aux.layer_stretch((q - j - 0.5) * h, coeffs.omega)]

    stretches = list(coeffs.stretches)
    stretches[axis] = AxisStretch(np.concatenate(nodes), np.concatenate(halves))
    return StencilCoefficients.from_stretches(
        coeffs.h, coeffs.omega, k2, tuple(stretches)
    )


def extract_outer(
    coeffs: StencilCoefficients, spec: SubproblemSpec, pml: PmlProfile
) -> StencilCoefficients:
    """Quasi-2D subproblem along x3 with its moving PML."""
    if spec.axis != 2:
        raise DimensionError("outer subproblems sweep along x3")
    return _extract(coeffs, spec, pml)


def extract_inner(
    quasi2d: StencilCoefficients, spec: SubproblemSpec, pml: PmlProfile
) -> StencilCoefficients:
    """Quasi-1D subproblem along x2 of a quasi-2D slab."""
    if spec.axis != 1:
        raise DimensionError("inner subproblems sweep along x2")
    return _extract(quasi2d, spec, pml)


def couple(
    coeffs: StencilCoefficients,
    from_group: SubproblemSpec,
    to_group: SubproblemSpec,
    u_part: np.ndarray,
) -> np.ndarray:
    """Apply the off-diagonal block A[to, from] to the owned values u_part."""
    axis = from_group.axis
    if to_group.axis != axis:
        raise DimensionError("groups lie on different axes")
    expected = list(coeffs.shape)
    expected[axis] = from_group.layers
    if u_part.shape != tuple(expected):
        raise DimensionError(f"block of shape {u_part.shape}, expected {tuple(expected)}")

    shape = list(coeffs.shape)
    shape[axis] = to_group.layers
    result = np.zeros(shape, dtype=complex)
    if to_group.start == from_group.stop:
        result[_slab(axis, 0, 1)] = (
            coeffs.lower[axis][_slab(axis, to_group.start, to_group.start + 1)]
            * u_part[_slab(axis, -1, None)]
        )
    elif to_group.stop == from_group.start:
        result[_slab(axis, -1, None)] = (
            coeffs.upper[axis][_slab(axis, to_group.stop - 1, to_group.stop)]
            * u_part[_slab(axis, 0, 1)]
        )
    else:
        raise DimensionError(
            f"groups [{from_group.start}, {from_group.stop}) and "
            f"[{to_group.start}, {to_group.stop}) are not adjacent"
        )
    return result
