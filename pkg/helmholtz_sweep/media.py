"""Grid, PML profiles, velocity fields and sources on the unit cube."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from scipy.ndimage import gaussian_filter

from .const import (
    DEFAULT_PML_CONSTANT,
    DEFAULT_PML_LAYERS,
    DEFAULT_POINT_SOURCE_CENTER,
    DEFAULT_SOURCE_DIRECTION,
    DEFAULT_VELOCITY_AMPLITUDE,
    DEFAULT_VELOCITY_C0,
    DEFAULT_VELOCITY_CENTER,
    DEFAULT_VELOCITY_SHARPNESS,
    DEFAULT_VELOCITY_SMOOTHING,
    DEFAULT_WAVE_PACKET_CENTER,
    FACE_NAMES,
    LENS_BACKGROUND,
    LENS_DEPTH,
    RANDOM_VELOCITY_BOUNDS,
    REQUIRED_PML_FACES,
    SOURCE_CUSTOM,
    SOURCE_DELTA,
    SOURCE_POINT_GAUSSIAN,
    SOURCE_WAVE_PACKET,
    VELOCITY_CONSTANT,
    VELOCITY_CUSTOM,
    VELOCITY_LENS,
    VELOCITY_RANDOM,
    VELOCITY_WAVEGUIDE,
)
from .exceptions import ConfigurationError

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class Grid3D:
    """Uniform grid of n interior points per dimension on the unit cube."""

    n: int
    omega: float
    q: int | None = None

    def __post_init__(self) -> None:
        """Validate the grid parameters."""
        if self.n < 1:
            raise ConfigurationError(f"grid needs at least one point, got n={self.n}")
        if not self.omega > 0:
            raise ConfigurationError(f"omega must be positive, got {self.omega}")

    @classmethod
    def from_frequency(cls, omega_over_2pi: float, q: int) -> Grid3D:
        """Build the grid resolving the typical wavelength with q cells."""
        if omega_over_2pi <= 0 or q < 1:
            raise ConfigurationError(
                f"invalid frequency/resolution: omega/2pi={omega_over_2pi}, q={q}"
            )
        n = round(q * omega_over_2pi) - 1
        return cls(n=n, omega=2 * math.pi * omega_over_2pi, q=q)

    @property
    def h(self) -> float:
        """Grid spacing."""
        return 1.0 / (self.n + 1)

    @property
    def N(self) -> int:
        """Total number of unknowns."""
        return self.n**3

    @property
    def shape(self) -> tuple[int, int, int]:
        """Array shape of a grid field, indexed [x1, x2, x3]."""
        return (self.n, self.n, self.n)

    @property
    def wavelength(self) -> float:
        """Typical wavelength 2*pi/omega."""
        return 2 * math.pi / self.omega

    def coordinates(self) -> np.ndarray:
        """Interior node coordinates along one axis."""
        return np.arange(1, self.n + 1) * self.h

    def mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Node coordinates of the whole grid."""
        x = self.coordinates()
        return np.meshgrid(x, x, x, indexing="ij")


def _stretch_from_sigma(sigma: np.ndarray, omega: float) -> np.ndarray:
    return 1.0 / (1.0 + 1j * sigma / omega)


@dataclass(frozen=True)
class PmlProfile:
    """Quadratic PML damping with per-face PML/Dirichlet flags."""

    h: float
    b: int = DEFAULT_PML_LAYERS
    C: float = DEFAULT_PML_CONSTANT
    faces: frozenset[str] = frozenset(FACE_NAMES)

    def __post_init__(self) -> None:
        """Validate the profile parameters."""
        unknown = set(self.faces) - set(FACE_NAMES)
        if unknown:
            raise ConfigurationError(f"unknown PML faces: {sorted(unknown)}")
        if self.b < 0:
            raise ConfigurationError(f"PML layers must be >= 0, got {self.b}")
        if not self.C > 0:
            raise ConfigurationError(f"PML constant must be positive, got {self.C}")
        object.__setattr__(self, "faces", frozenset(self.faces))

    @property
    def eta(self) -> float:
        """PML width."""
        return self.b * self.h

    def has_face(self, face: str) -> bool:
        """Return True if the face carries a PML."""
        return face in self.faces

    def sigma(self, x: Any) -> np.ndarray:
        """Damping at distance x from a PML face."""
        x = np.asarray(x, dtype=float)
        if self.b == 0:
            return np.zeros_like(x)
        eta = self.eta
        return np.where(
            x <= eta, self.C / eta * ((x - eta) / eta) ** 2, 0.0
        )

    def stretch(self, x: Any, axis: int, omega: float) -> np.ndarray:
        """Complex stretching s along axis (1, 2 or 3) at coordinate x."""
        if axis not in (1, 2, 3):
            raise ConfigurationError(f"axis must be 1, 2 or 3, got {axis}")
        x = np.asarray(x, dtype=float)
        sigma = np.zeros_like(x)
        if self.has_face(f"x{axis}_low"):
            sigma = sigma + self.sigma(x)
        if self.has_face(f"x{axis}_high"):
            sigma = sigma + self.sigma(1.0 - x)
        return _stretch_from_sigma(sigma, omega)

    def layer_stretch(self, distance: Any, omega: float) -> np.ndarray:
        """Stretching at a distance from a (possibly moving) PML ghost plane."""
        return _stretch_from_sigma(self.sigma(distance), omega)

    def with_layers(self, b: int) -> PmlProfile:
        """Return the same profile with b layers, for auxiliary PMLs."""
        return replace(self, b=b)

    def validate_for_sweep(self, two_front: bool = False) -> None:
        """Check the faces needed by the recursive sweep carry a PML."""
        missing = [face for face in REQUIRED_PML_FACES if not self.has_face(face)]
        if missing:
            raise ConfigurationError(
                f"recursive sweep requires PML on faces {missing}"
            )
        if self.b < 1:
            raise ConfigurationError("PML-flagged faces need at least one layer")
        if two_front:
            for face in ("x2_high", "x3_high"):
                if not self.has_face(face):
                    _LOGGER.warning(
                        "Two-front sweep with Dirichlet face %s; the far front "
                        "gets no absorbing boundary", face
                    )


def sigma_at(x: Any, profile: PmlProfile) -> np.ndarray:
    """Damping value sigma(x) of the quadratic PML profile."""
    return profile.sigma(x)


def stretch_at(x: Any, axis: int, profile: PmlProfile, omega: float) -> np.ndarray:
    """Complex stretching s(x) = (1 + i sigma(x)/omega)^-1 along an axis."""
    return profile.stretch(x, axis, omega)


@dataclass(frozen=True, eq=False)
class VelocityField:
    """Wave speed at every grid node."""

    c: np.ndarray
    kind: str = VELOCITY_CUSTOM
    c_min: float = field(init=False)
    c_max: float = field(init=False)

    def __post_init__(self) -> None:
        """Freeze the array and record its bounds."""
        c = np.array(self.c, dtype=float)
        if c.size == 0 or not np.all(np.isfinite(c)) or np.any(c <= 0):
            raise ConfigurationError("velocity must be finite and positive")
        c.flags.writeable = False
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "c_min", float(c.min()))
        object.__setattr__(self, "c_max", float(c.max()))

    @property
    def shape(self) -> tuple[int, ...]:
        """Array shape."""
        return self.c.shape


@dataclass(frozen=True, eq=False)
class SourceField:
    """Complex right-hand side at every grid node."""

    f: np.ndarray
    kind: str = SOURCE_CUSTOM

    def __post_init__(self) -> None:
        """Freeze the array."""
        f = np.array(self.f, dtype=complex)
        f.flags.writeable = False
        object.__setattr__(self, "f", f)

    @property
    def shape(self) -> tuple[int, ...]:
        """Array shape."""
        return self.f.shape


def _unit_point(value: Any, name: str) -> np.ndarray:
    point = np.asarray(value, dtype=float)
    if point.shape != (3,):
        raise ConfigurationError(f"{name} must have three coordinates")
    if np.any(point < 0) or np.any(point > 1):
        raise ConfigurationError(f"{name} {tuple(point)} lies outside the unit cube")
    return point


def _squared_distance(grid: Grid3D, center: np.ndarray, axes: int = 3) -> np.ndarray:
    mesh = grid.mesh()
    return sum((mesh[a] - center[a]) ** 2 for a in range(axes))


def make_velocity(
    kind: str, grid: Grid3D, params: dict[str, Any] | None = None
) -> VelocityField:
    """Generate a velocity field.

    Args:
        kind: One of lens, waveguide, random or constant.
        grid: The computational grid.
        params: Optional keys c0, center, sharpness (lens and waveguide),
            amplitude, smoothing and seed (random, seed is mandatory).
    """
    params = params or {}

    if kind == VELOCITY_CONSTANT:
        c0 = float(params.get("c0", DEFAULT_VELOCITY_C0))
        c = np.full(grid.shape, c0)

    elif kind in (VELOCITY_LENS, VELOCITY_WAVEGUIDE):
        center = _unit_point(params.get("center", DEFAULT_VELOCITY_CENTER), "center")
        sharpness = float(params.get("sharpness", DEFAULT_VELOCITY_SHARPNESS))
        # The waveguide is the lens profile without x3 dependence
        axes = 3 if kind == VELOCITY_LENS else 2
        r2 = _squared_distance(grid, center, axes)
        c = LENS_BACKGROUND * (1.0 - LENS_DEPTH * np.exp(-sharpness * r2))

    elif kind == VELOCITY_RANDOM:
        if params.get("seed") is None:
            raise ConfigurationError("random velocity requires an explicit seed")
        c0 = float(params.get("c0", DEFAULT_VELOCITY_C0))
        amplitude = float(params.get("amplitude", DEFAULT_VELOCITY_AMPLITUDE))
        smoothing = float(params.get("smoothing", DEFAULT_VELOCITY_SMOOTHING))
        rng = np.random.default_rng(int(params["seed"]))
        noise = gaussian_filter(rng.standard_normal(grid.shape), sigma=smoothing)
        std = noise.std()
        if std > 0:
            noise = noise / std
        low, high = RANDOM_VELOCITY_BOUNDS
        c = np.clip(c0 * (1.0 + amplitude * noise), low * c0, high * c0)

    else:
        raise ConfigurationError(f"unknown velocity kind: {kind}")

    _LOGGER.debug("Generated %s velocity on n=%d", kind, grid.n)
    return VelocityField(c=c, kind=kind)


def _pml_mask(grid: Grid3D, pml: PmlProfile) -> np.ndarray:
    """Boolean mask of nodes inside PML-flagged boundary layers."""
    mask = np.zeros(grid.shape, dtype=bool)
    b = min(pml.b, grid.n)
    for axis in range(3):
        index: list[Any] = [slice(None)] * 3
        if pml.has_face(f"x{axis + 1}_low"):
            index[axis] = slice(0, b)
            mask[tuple(index)] = True
        if pml.has_face(f"x{axis + 1}_high"):
            index[axis] = slice(grid.n - b, grid.n)
            mask[tuple(index)] = True
    return mask


def make_source(
    kind: str,
    grid: Grid3D,
    params: dict[str, Any] | None = None,
    pml: PmlProfile | None = None,
) -> SourceField:
    """Generate a right-hand side.

    Args:
        kind: One of point_gaussian, wave_packet or delta.
        grid: The computational grid.
        params: Optional keys center, direction, sharpness (Gaussian kinds)
            and node (0-based index triple, delta).
        pml: When given, the source is zeroed inside the PML layers.
    """
    params = params or {}
    omega = grid.omega

    if kind == SOURCE_POINT_GAUSSIAN:
        center = _unit_point(
            params.get("center", DEFAULT_POINT_SOURCE_CENTER), "source center"
        )
        sharpness = float(params.get("sharpness", (4 * omega / math.pi) ** 2))
        f = np.exp(-sharpness * _squared_distance(grid, center)).astype(complex)

    elif kind == SOURCE_WAVE_PACKET:
        center = _unit_point(
            params.get("center", DEFAULT_WAVE_PACKET_CENTER), "source center"
        )
        direction = np.asarray(
            params.get("direction", DEFAULT_SOURCE_DIRECTION), dtype=float
        )
        norm = np.linalg.norm(direction)
        if direction.shape != (3,) or norm == 0:
            raise ConfigurationError("wave packet direction must be a nonzero 3-vector")
        direction = direction / norm
        sharpness = float(params.get("sharpness", 4 * omega))
        mesh = grid.mesh()
        phase = sum(direction[a] * (mesh[a] - center[a]) for a in range(3))
        envelope = np.exp(-sharpness * _squared_distance(grid, center))
        f = envelope * np.exp(1j * omega * phase)

    elif kind == SOURCE_DELTA:
        node = tuple(int(i) for i in params.get("node", (grid.n // 2,) * 3))
        if len(node) != 3 or any(i < 0 or i >= grid.n for i in node):
            raise ConfigurationError(f"delta node {node} lies outside the grid")
        f = np.zeros(grid.shape, dtype=complex)
        f[node] = 1.0

    else:
        raise ConfigurationError(f"unknown source kind: {kind}")

    if pml is not None:
        f = np.where(_pml_mask(grid, pml), 0.0, f)

    return SourceField(f=f, kind=kind)
