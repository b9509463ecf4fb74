"""Exact factorizations of subproblems."""
from __future__ import annotations

import logging

import numpy as np
import scipy.sparse.linalg as spla
from scipy.linalg import lu_factor, lu_solve

from .const import DEFAULT_DENSE_THRESHOLD
from .exceptions import FactorizationError
from .stencil import StencilCoefficients, as_field

_LOGGER = logging.getLogger(__name__)


def _checked_lu(matrix: np.ndarray, block: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Partial-pivoting LU with a finite, nonzero pivot check."""
    if not np.all(np.isfinite(matrix)):
        raise FactorizationError("matrix has non-finite entries", block=block)
    lu, piv = lu_factor(matrix, check_finite=False)
    pivots = np.diag(lu)
    if not np.all(np.isfinite(pivots)) or np.any(pivots == 0):
        raise FactorizationError("singular matrix", block=block)
    return lu, piv


class BandedBlockFactorization:
    """Block LDU of a quasi-1D problem with one block per x1 plane.

    Only the Schur complement factors are kept. The coupling between
    planes is diagonal, so the off-diagonal blocks are applied as vectors.
    """

    def __init__(self, coeffs: StencilCoefficients) -> None:
        """Initialize the factorization."""
        n1, n2, n3 = coeffs.shape
        self.shape = coeffs.shape
        block = n2 * n3
        self._lower = coeffs.lower[0].reshape(n1, block)
        self._upper = coeffs.upper[0].reshape(n1, block)

        index = np.arange(block).reshape(n2, n3)
        self._factors: list[tuple[np.ndarray, np.ndarray]] = []
        for i in range(n1):
            diagonal = np.zeros((block, block), dtype=complex)
            diagonal[index, index] = coeffs.center[i]
            diagonal[index[:-1, :], index[1:, :]] = coeffs.upper[1][i, :-1, :]
            diagonal[index[1:, :], index[:-1, :]] = coeffs.lower[1][i, 1:, :]
            diagonal[index[:, :-1], index[:, 1:]] = coeffs.upper[2][i, :, :-1]
            diagonal[index[:, 1:], index[:, :-1]] = coeffs.lower[2][i, :, 1:]
            if i > 0:
                coupled = lu_solve(
                    self._factors[-1], np.diag(self._upper[i - 1]), check_finite=False
                )
                diagonal -= self._lower[i][:, None] * coupled
            self._factors.append(_checked_lu(diagonal, block=i))

    @property
    def block_count(self) -> int:
        """Number of diagonal blocks."""
        return len(self._factors)

    @property
    def factors(self) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
        """LU factors and pivots of the Schur complement of each plane."""
        return tuple(self._factors)

    @property
    def nbytes(self) -> int:
        """Memory held by the factors and couplings."""
        stored = sum(lu.nbytes + piv.nbytes for lu, piv in self._factors)
        return stored + self._lower.nbytes + self._upper.nbytes

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve against a field or flat vector of the subproblem's size."""
        field, flat = as_field(rhs, self.shape)
        r = field.reshape(self.block_count, -1)
        y = np.empty(r.shape, dtype=complex)
        previous = None
        for i, factor in enumerate(self._factors):
            b = r[i] if previous is None else r[i] - self._lower[i] * previous
            y[i] = lu_solve(factor, b, check_finite=False)
            previous = y[i]
        for i in range(self.block_count - 2, -1, -1):
            y[i] -= lu_solve(
                self._factors[i], self._upper[i] * y[i + 1], check_finite=False
            )
        x = y.reshape(self.shape)
        return x.ravel(order="F") if flat else x


class ExactFactorization:
    """LU of an arbitrary subproblem, dense below a size threshold."""

    def __init__(
        self,
        coeffs: StencilCoefficients,
        dense_threshold: int = DEFAULT_DENSE_THRESHOLD,
    ) -> None:
        """Initialize the factorization."""
        self.shape = coeffs.shape
        matrix = coeffs.to_sparse()
        self._dense: tuple[np.ndarray, np.ndarray] | None = None
        self._sparse: spla.SuperLU | None = None
        if coeffs.size <= dense_threshold:
            self._dense = _checked_lu(matrix.toarray())
            return
        try:
            self._sparse = spla.splu(matrix)
        except RuntimeError as err:
            raise FactorizationError(f"sparse LU failed: {err}") from err

    @property
    def is_dense(self) -> bool:
        """True when the dense LU path was taken."""
        return self._dense is not None

    @property
    def nbytes(self) -> int:
        """Memory held by the factors."""
        if self._dense is not None:
            lu, piv = self._dense
            return lu.nbytes + piv.nbytes
        factors = (self._sparse.L, self._sparse.U)
        stored = sum(m.data.nbytes + m.indices.nbytes + m.indptr.nbytes for m in factors)
        return stored + self._sparse.perm_r.nbytes + self._sparse.perm_c.nbytes

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve against a field or flat vector of the subproblem's size."""
        field, flat = as_field(rhs, self.shape)
        b = field.ravel(order="F").astype(complex)
        if self._dense is not None:
            x = lu_solve(self._dense, b, check_finite=False)
        else:
            x = self._sparse.solve(b)
        return x if flat else x.reshape(self.shape, order="F")


def factor_quasi1d(coeffs: StencilCoefficients) -> BandedBlockFactorization:
    """Factorize a quasi-1D subproblem plane by plane along x1."""
    fact = BandedBlockFactorization(coeffs)
    _LOGGER.debug(
        "Factorized quasi-1D problem %s into %d blocks", coeffs.shape, fact.block_count
    )
    return fact


def solve_quasi1d(fact: BandedBlockFactorization, rhs: np.ndarray) -> np.ndarray:
    """Solve with a banded block factorization."""
    return fact.solve(rhs)


def factor_exact(
    coeffs: StencilCoefficients, dense_threshold: int = DEFAULT_DENSE_THRESHOLD
) -> ExactFactorization:
    """Factorize any subproblem exactly."""
    fact = ExactFactorization(coeffs, dense_threshold)
    _LOGGER.debug(
        "Factorized %s problem %s exactly", "dense" if fact.is_dense else "sparse",
        coeffs.shape,
    )
    return fact


def solve_exact(fact: ExactFactorization, rhs: np.ndarray) -> np.ndarray:
    """Solve with an exact factorization."""
    return fact.solve(rhs)
