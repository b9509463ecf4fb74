"""Build a problem from a configuration, solve it and write artifacts."""
from __future__ import annotations

import logging
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .config import ExperimentConfig
from .const import (
    ATTR_AUX_PML_LAYERS,
    ATTR_ERROR,
    ATTR_FRONTS,
    ATTR_KEY,
    ATTR_N,
    ATTR_OMEGA_OVER_2PI,
    ATTR_PRECONDITIONER,
    ATTR_Q,
    ATTR_STATUS,
    ATTR_UNKNOWNS,
    CONF_AUX_PML_LAYERS,
    CONF_DENSE_THRESHOLD,
    CONF_FRONTS,
    CONF_GROUP_SIZE,
    CONF_MAX_ITER,
    CONF_N,
    CONF_OMEGA_OVER_2PI,
    CONF_OUTPUT_DIR,
    CONF_PML_CONSTANT,
    CONF_PML_FACES,
    CONF_PML_LAYERS,
    CONF_PRECONDITIONER,
    CONF_Q,
    CONF_REPORT_NAME,
    CONF_RESTART,
    CONF_SAVE_SOLUTION,
    CONF_SLICES,
    CONF_SOURCE,
    CONF_SOURCE_CENTER,
    CONF_SOURCE_DIRECTION,
    CONF_SOURCE_NODE,
    CONF_TOL,
    CONF_VELOCITY,
    CONF_VELOCITY_AMPLITUDE,
    CONF_VELOCITY_C0,
    CONF_VELOCITY_CENTER,
    CONF_VELOCITY_SEED,
    CONF_VELOCITY_SHARPNESS,
    CONF_VELOCITY_SMOOTHING,
    HSW_EXTENSION,
    MODE_APPROXIMATE,
    MODE_EXACT,
    PLANES,
    PRECONDITIONER_EXACT_SWEEP,
    PRECONDITIONER_NONE,
    PRECONDITIONER_NONRECURSIVE,
    SLICE_MIDPOINT,
    STATUS_FAILED,
)
from .exceptions import ConfigurationError, DimensionError
from .field_io import save_field
from .krylov import SolveReport, gmres
from .media import (
    Grid3D,
    PmlProfile,
    SourceField,
    VelocityField,
    make_source,
    make_velocity,
)
from .stencil import StencilCoefficients, assemble
from .store import ReportStore
from .sweep import (
    SweepConfig,
    SweepPreconditioner,
    setup_nonrecursive,
    setup_recursive,
)

_LOGGER = logging.getLogger(__name__)

COMPLEX_BYTES = np.dtype(complex).itemsize


@dataclass
class Problem:
    """Grid, media and discretized operator of one experiment."""

    grid: Grid3D
    pml: PmlProfile
    velocity: VelocityField
    source: SourceField
    coeffs: StencilCoefficients


@dataclass
class RunResult:
    """Outcome of one experiment."""

    report: SolveReport
    row: dict[str, Any]
    solution: np.ndarray
    artifacts: list[Path] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        """Whether GMRES reached the tolerance."""
        return self.report.converged


# Config key -> generator parameter name
_VELOCITY_PARAMS = {
    CONF_VELOCITY_SEED: "seed",
    CONF_VELOCITY_C0: "c0",
    CONF_VELOCITY_CENTER: "center",
    CONF_VELOCITY_AMPLITUDE: "amplitude",
    CONF_VELOCITY_SHARPNESS: "sharpness",
    CONF_VELOCITY_SMOOTHING: "smoothing",
}
_SOURCE_PARAMS = {
    CONF_SOURCE_CENTER: "center",
    CONF_SOURCE_DIRECTION: "direction",
    CONF_SOURCE_NODE: "node",
}


def _params(config: ExperimentConfig, mapping: dict[str, str]) -> dict[str, Any]:
    return {
        name: config[key] for key, name in mapping.items() if config.get(key) is not None
    }


def build_problem(config: ExperimentConfig) -> Problem:
    """Generate the grid, media and operator described by a configuration."""
    if config.get(CONF_N) is not None:
        grid = Grid3D(n=config[CONF_N], omega=config.omega, q=config[CONF_Q])
    else:
        grid = Grid3D.from_frequency(config[CONF_OMEGA_OVER_2PI], config[CONF_Q])
    pml = PmlProfile(
        h=grid.h,
        b=config[CONF_PML_LAYERS],
        C=config[CONF_PML_CONSTANT],
        faces=frozenset(config[CONF_PML_FACES]),
    )
    velocity = make_velocity(config[CONF_VELOCITY], grid, _params(config, _VELOCITY_PARAMS))
    source = make_source(
        config[CONF_SOURCE], grid, _params(config, _SOURCE_PARAMS), pml=pml
    )
    coeffs = assemble(grid, velocity, pml)
    _LOGGER.info(
        "Built problem: n=%d, N=%d, omega/2pi=%s", grid.n, grid.N, config[CONF_OMEGA_OVER_2PI]
    )
    return Problem(grid, pml, velocity, source, coeffs)


def sweep_config(config: ExperimentConfig, pml: PmlProfile) -> SweepConfig:
    """Sweep settings of a configuration."""
    exact = config[CONF_PRECONDITIONER] == PRECONDITIONER_EXACT_SWEEP
    return SweepConfig(
        pml=pml,
        aux_layers=config[CONF_AUX_PML_LAYERS],
        group_size=config[CONF_GROUP_SIZE],
        fronts=config[CONF_FRONTS],
        mode=MODE_EXACT if exact else MODE_APPROXIMATE,
        dense_threshold=config[CONF_DENSE_THRESHOLD],
    )


def build_preconditioner(
    config: ExperimentConfig, problem: Problem
) -> SweepPreconditioner | None:
    """Set up the configured preconditioner, or None for plain GMRES."""
    kind = config[CONF_PRECONDITIONER]
    if kind == PRECONDITIONER_NONE:
        return None
    cfg = sweep_config(config, problem.pml)
    if kind == PRECONDITIONER_NONRECURSIVE:
        return setup_nonrecursive(problem.coeffs, cfg)
    return setup_recursive(problem.coeffs, cfg)


def estimate_memory(
    coeffs: StencilCoefficients, pc: SweepPreconditioner | None, restart: int
) -> int:
    """Bytes held by the factorizations, the operator and the Krylov basis."""
    basis = (restart + 1) * coeffs.size * COMPLEX_BYTES
    return (pc.nbytes if pc is not None else 0) + coeffs.nbytes + basis


def report_row(
    config: ExperimentConfig, report: SolveReport | None, key: str | None = None
) -> dict[str, Any]:
    """Report row of a configuration; without a report the row is a failure."""
    n = config.grid_size
    row = {
        ATTR_KEY: key or config.row_key(),
        ATTR_OMEGA_OVER_2PI: config[CONF_OMEGA_OVER_2PI],
        ATTR_Q: config[CONF_Q],
        ATTR_N: n,
        ATTR_UNKNOWNS: n**3,
        ATTR_PRECONDITIONER: config[CONF_PRECONDITIONER],
        ATTR_FRONTS: config[CONF_FRONTS],
        ATTR_AUX_PML_LAYERS: config[CONF_AUX_PML_LAYERS],
        ATTR_ERROR: "",
    }
    if report is None:
        row[ATTR_STATUS] = STATUS_FAILED
    else:
        row.update(report.as_row())
    return row


def _write_pgm(path: Path, plane: np.ndarray) -> Path:
    """Quick-look image of the real part, gray 128 at zero."""
    real = np.real(plane)
    peak = np.max(np.abs(real))
    scaled = real / peak if peak > 0 else np.zeros_like(real)
    pixels = np.clip(np.rint(127.5 * (scaled + 1.0)), 0, 255).astype(np.uint8)
    # First coordinate runs left to right, second bottom to top
    image = np.flipud(pixels.T)
    height, width = image.shape
    with path.open("wb") as handle:
        handle.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        handle.write(np.ascontiguousarray(image).tobytes())
    return path


def export_slice(u: np.ndarray, plane: str, index: int, path: str | Path) -> Path:
    """Write the 2D slice of u at a plane index as HSW1 plus a PGM quick look."""
    if plane not in PLANES:
        raise ConfigurationError(f"plane must be one of {PLANES}, got {plane!r}")
    axis = PLANES.index(plane)
    if not 0 <= index < u.shape[axis]:
        raise DimensionError(
            f"slice index {index} outside [0, {u.shape[axis]}) along {plane}"
        )
    data = np.take(u, index, axis=axis)
    path = save_field(path, data)
    _write_pgm(path.with_suffix(".pgm"), data)
    _LOGGER.debug("Exported %s slice %d to %s", plane, index, path)
    return path


def _stem(key: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", key).strip("_")


def execute(
    config: ExperimentConfig,
    output_dir: str | Path | None = None,
    key: str | None = None,
) -> RunResult:
    """Solve one configuration and write its slices and solution."""
    problem = build_problem(config)

    started = time.monotonic()
    pc = build_preconditioner(config, problem)
    setup_time = time.monotonic() - started

    f = problem.source.f.ravel(order="F")
    u, report = gmres(
        problem.coeffs.apply,
        pc.apply if pc is not None else None,
        f,
        tol=config[CONF_TOL],
        restart=config[CONF_RESTART],
        max_iter=config[CONF_MAX_ITER],
    )
    report.setup_time = setup_time
    report.memory_bytes = estimate_memory(problem.coeffs, pc, config[CONF_RESTART])

    solution = u.reshape(problem.grid.shape, order="F")
    row = report_row(config, report, key)
    result = RunResult(report=report, row=row, solution=solution)

    out = Path(output_dir if output_dir is not None else config[CONF_OUTPUT_DIR])
    stem = _stem(row[ATTR_KEY])
    if config[CONF_SLICES] or config[CONF_SAVE_SOLUTION]:
        out.mkdir(parents=True, exist_ok=True)
    for item in config[CONF_SLICES]:
        plane, _, index = item.partition(":")
        axis = PLANES.index(plane)
        index = solution.shape[axis] // 2 if index == SLICE_MIDPOINT else int(index)
        path = out / f"{stem}_{plane}_{index}{HSW_EXTENSION}"
        result.artifacts.append(export_slice(solution, plane, index, path))
    if config[CONF_SAVE_SOLUTION]:
        result.artifacts.append(save_field(out / f"{stem}_solution{HSW_EXTENSION}", solution))
    return result


def run(config: ExperimentConfig, output_dir: str | Path | None = None) -> RunResult:
    """Solve one configuration and merge its row into the report CSV."""
    result = execute(config, output_dir)
    out = Path(output_dir if output_dir is not None else config[CONF_OUTPUT_DIR])
    store = ReportStore(out / config[CONF_REPORT_NAME])
    store.load()
    store.merge_rows([result.row])
    store.save()
    _LOGGER.info("Report row %s written to %s", result.row[ATTR_KEY], store.path)
    return result
