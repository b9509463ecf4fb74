"""Restarted GMRES with right preconditioning.

Modified Gram-Schmidt builds the Arnoldi basis and complex Givens
rotations from BLAS keep the least-squares residual available at every
iteration. With right preconditioning the estimate tracks the residual of
the original system, which is recomputed whenever a cycle ends.
"""
from __future__ import annotations

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.linalg import get_blas_funcs, solve_triangular

from .const import (
    ATTR_FINAL_RESIDUAL,
    ATTR_N_ITER,
    ATTR_PEAK_MEMORY,
    ATTR_STATUS,
    ATTR_T_SETUP,
    ATTR_T_SOLVE,
    DEFAULT_MAX_ITER,
    DEFAULT_RESTART,
    DEFAULT_TOL,
    REORTH_DROP_TOLERANCE,
    RESIDUAL_MISMATCH_FACTOR,
    STATUS_CONVERGED,
    STATUS_NOT_CONVERGED,
)
from .exceptions import ConfigurationError

_LOGGER = logging.getLogger(__name__)

Operator = Callable[[np.ndarray], np.ndarray]


@dataclass
class SolveReport:
    """Outcome and instrumentation of one solve.

    ``residuals[k]`` is the relative residual estimate after k iterations,
    so the first entry is the residual of the initial guess.
    """

    iterations: int = 0
    cycles: int = 0
    residuals: list[float] = field(default_factory=list)
    converged: bool = False
    setup_time: float = 0.0
    solve_time: float = 0.0
    memory_bytes: int = 0
    true_residual: float | None = None
    cycle_starts: list[int] = field(default_factory=list)

    @property
    def final_residual(self) -> float:
        """True residual when known, otherwise the last estimate."""
        if self.true_residual is not None:
            return self.true_residual
        return self.residuals[-1] if self.residuals else float("nan")

    @property
    def status(self) -> str:
        """Report row status."""
        return STATUS_CONVERGED if self.converged else STATUS_NOT_CONVERGED

    def as_row(self) -> dict[str, Any]:
        """Solver columns of a report row."""
        return {
            ATTR_T_SETUP: self.setup_time,
            ATTR_N_ITER: self.iterations,
            ATTR_T_SOLVE: self.solve_time,
            ATTR_FINAL_RESIDUAL: self.final_residual,
            ATTR_PEAK_MEMORY: self.memory_bytes,
            ATTR_STATUS: self.status,
        }


def _as_operator(op: Any) -> Operator:
    if op is None:
        return lambda v: v
    if hasattr(op, "matvec"):
        return op.matvec
    if callable(op):
        return op
    return lambda v: op @ v


def gmres(
    apply_A: Any,
    apply_M: Any,
    f: np.ndarray,
    tol: float = DEFAULT_TOL,
    restart: int = DEFAULT_RESTART,
    max_iter: int = DEFAULT_MAX_ITER,
    x0: np.ndarray | None = None,
    callback: Callable[[int, float], None] | None = None,
) -> tuple[np.ndarray, SolveReport]:
    """Solve A u = f with GMRES(restart) preconditioned on the right by M.

    Args:
        apply_A: Callable, LinearOperator or matrix acting on flat vectors.
        apply_M: Same for the preconditioner, or None for no preconditioning.
        f: Right-hand side.
        tol: Relative residual target.
        restart: Iterations per cycle.
        max_iter: Total iteration budget (preconditioned operator products).
        x0: Optional initial guess.
        callback: Called with (iteration, residual estimate) every iteration.

    Returns:
        The approximate solution and a SolveReport.
    """
    if not tol > 0:
        raise ConfigurationError(f"tol must be positive, got {tol}")
    if restart < 1:
        raise ConfigurationError(f"restart must be at least 1, got {restart}")
    if max_iter < 0:
        raise ConfigurationError(f"max_iter must be non-negative, got {max_iter}")

    A = _as_operator(apply_A)
    M = _as_operator(apply_M)
    f = np.asarray(f, dtype=complex).ravel()
    report = SolveReport()
    started = time.perf_counter()

    norm_f = np.linalg.norm(f)
    if norm_f == 0:
        report.converged = True
        report.residuals.append(0.0)
        report.true_residual = 0.0
        return np.zeros_like(f), report

    x = np.zeros_like(f) if x0 is None else np.array(x0, dtype=complex).ravel()
    r = f - A(x) if x0 is not None else f.copy()
    beta = np.linalg.norm(r)
    true_residual = beta / norm_f
    report.residuals.append(true_residual)

    rotg = get_blas_funcs("rotg", (r,))
    breakdown = False
    while true_residual > tol and report.iterations < max_iter:
        report.cycles += 1
        report.cycle_starts.append(report.iterations)
        m = min(restart, max_iter - report.iterations)
        V = np.zeros((m + 1, f.size), dtype=complex)
        H = np.zeros((m + 1, m), dtype=complex)
        g = np.zeros(m + 1, dtype=complex)
        rotations: list[tuple[Any, Any]] = []
        V[0] = r / beta
        g[0] = beta

        k = 0
        estimate = true_residual
        for j in range(m):
            w = A(M(V[j]))
            report.iterations += 1
            k = j + 1

            norm_before = np.linalg.norm(w)
            for i in range(j + 1):
                H[i, j] = np.vdot(V[i], w)
                w -= H[i, j] * V[i]
            norm_after = np.linalg.norm(w)
            if norm_after < REORTH_DROP_TOLERANCE * norm_before:
                for i in range(j + 1):
                    correction = np.vdot(V[i], w)
                    H[i, j] += correction
                    w -= correction * V[i]
                norm_after = np.linalg.norm(w)
            H[j + 1, j] = norm_after

            for i, (c, s) in enumerate(rotations):
                H[i, j], H[i + 1, j] = (
                    c * H[i, j] + s * H[i + 1, j],
                    -np.conj(s) * H[i, j] + c * H[i + 1, j],
                )
            c, s = rotg(H[j, j], H[j + 1, j])
            # zrotg only writes the real part of c
            c = c.real
            rotations.append((c, s))
            H[j, j] = c * H[j, j] + s * H[j + 1, j]
            H[j + 1, j] = 0
            g[j], g[j + 1] = c * g[j], -np.conj(s) * g[j]

            estimate = abs(g[j + 1]) / norm_f
            report.residuals.append(estimate)
            _LOGGER.debug("GMRES iteration %d: residual %.3e", report.iterations, estimate)
            if callback is not None:
                callback(report.iterations, estimate)

            breakdown = norm_after <= np.finfo(float).eps * norm_before
            if breakdown or estimate <= tol:
                break
            V[j + 1] = w / norm_after

        diagonal = np.abs(np.diag(H[:k, :k]))
        if np.any(diagonal == 0):
            _LOGGER.warning("GMRES least-squares system is singular after %d iterations", k)
            break
        y = solve_triangular(H[:k, :k], g[:k], check_finite=False)
        x = x + M(V[:k].T @ y)
        r = f - A(x)
        beta = np.linalg.norm(r)
        true_residual = beta / norm_f

        if estimate <= tol and true_residual > RESIDUAL_MISMATCH_FACTOR * max(estimate, tol):
            _LOGGER.warning(
                "GMRES residual estimate %.3e disagrees with true residual %.3e",
                estimate,
                true_residual,
            )
        if breakdown or beta == 0:
            break

    report.converged = true_residual <= tol
    report.true_residual = true_residual
    report.solve_time = time.perf_counter() - started
    if report.converged:
        _LOGGER.info(
            "GMRES converged in %d iterations to residual %.3e",
            report.iterations,
            true_residual,
        )
    else:
        _LOGGER.info(
            "GMRES stopped after %d iterations at residual %.3e",
            report.iterations,
            true_residual,
        )
    return x, report
