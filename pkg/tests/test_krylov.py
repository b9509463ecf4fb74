"""Tests for restarted GMRES."""
from unittest.mock import MagicMock

import numpy as np
import pytest
from scipy.sparse.linalg import aslinearoperator

from helmholtz_sweep.exceptions import ConfigurationError
from helmholtz_sweep.krylov import SolveReport, gmres
from helmholtz_sweep.media import Grid3D, PmlProfile, make_source, make_velocity
from helmholtz_sweep.stencil import assemble
from helmholtz_sweep.sweep import SweepConfig, setup_recursive

from .conftest import make_operator, random_field


def _minimal_residuals(matrix, f, steps):
    """Independent minimal-residual oracle over growing Krylov spaces."""
    basis = (f / np.linalg.norm(f))[:, None]
    residuals = []
    for _ in range(steps):
        image = matrix @ basis
        y = np.linalg.lstsq(image, f, rcond=None)[0]
        residuals.append(np.linalg.norm(f - image @ y) / np.linalg.norm(f))
        basis = np.linalg.qr(np.column_stack([basis, image[:, -1]]))[0]
    return residuals


class TestGmres:
    """Test gmres."""

    def setup_method(self):
        """Set up test fixtures."""
        self.diagonal = np.diag(np.arange(1.0, 9.0)).astype(complex)

    def test_identity(self, rng):
        """Test the identity converges in one iteration."""
        f = random_field(rng, 10)
        x, report = gmres(lambda v: v, None, f, tol=1e-12)
        assert report.converged
        assert report.iterations == 1
        np.testing.assert_allclose(x, f)

    def test_exact_preconditioner(self, rng):
        """Test an exact inverse as preconditioner converges at once."""
        _, pml, coeffs = make_operator(n=7)
        cfg = SweepConfig(pml=pml, aux_layers=2, group_size=2, mode="exact")
        pc = setup_recursive(coeffs, cfg)
        f = random_field(rng, coeffs.size)
        x, report = gmres(coeffs.apply, pc.apply, f, tol=1e-8)
        assert report.converged
        assert report.iterations == 1
        assert report.true_residual <= 1e-8
        assert np.linalg.norm(coeffs.apply(x) - f) <= 1e-8 * np.linalg.norm(f)

    def test_matches_minimal_residual_oracle(self, rng):
        """Test residual estimates against an independent least-squares solve."""
        f = random_field(rng, 8)
        _, report = gmres(self.diagonal, None, f, tol=1e-10, restart=20)
        assert report.converged
        assert report.iterations <= 8
        expected = _minimal_residuals(self.diagonal, f, report.iterations)
        for k, value in enumerate(expected, start=1):
            assert abs(report.residuals[k] - value) <= 1e-8

    def test_complex_nonnormal_matches_oracle(self, rng):
        """Test complex rotations against the least-squares oracle."""
        matrix = 4 * np.eye(12) + random_field(rng, (12, 12)) / 6
        f = random_field(rng, 12)
        _, report = gmres(matrix, None, f, tol=1e-10, restart=30)
        assert report.converged
        assert report.iterations <= 12
        expected = _minimal_residuals(matrix, f, report.iterations)
        for k, value in enumerate(expected, start=1):
            assert abs(report.residuals[k] - value) <= 1e-8
        assert report.true_residual <= 10 * max(report.residuals[-1], 1e-10)

    def test_helmholtz_estimate_tracks_true_residual(self):
        """Test the estimate follows the true residual on a PML Helmholtz system."""
        grid = Grid3D.from_frequency(4, 8)
        pml = PmlProfile(h=grid.h)
        coeffs = assemble(grid, make_velocity("lens", grid), pml)
        f = make_source("point_gaussian", grid, pml=pml).f.ravel(order="F")
        histories = []
        for _ in range(2):
            _, report = gmres(coeffs.apply, None, f, tol=1e-3, restart=40, max_iter=80)
            assert report.true_residual <= 10 * report.residuals[-1]
            assert report.residuals[-1] <= 10 * report.true_residual
            histories.append(report.residuals)
        assert histories[0] == histories[1]

    def test_residuals_start_at_initial_residual(self, rng):
        """Test the first residual entry belongs to the initial guess."""
        f = random_field(rng, 8)
        _, report = gmres(self.diagonal, None, f, tol=1e-10)
        assert report.residuals[0] == 1.0
        assert len(report.residuals) == report.iterations + 1

    def test_monotone_within_cycles(self, rng):
        """Test estimates never increase inside a restart cycle."""
        matrix = np.diag(np.linspace(1.0, 20.0, 20)).astype(complex)
        f = random_field(rng, 20)
        _, report = gmres(matrix, None, f, tol=1e-6, restart=3, max_iter=60)
        assert report.cycles > 1
        bounds = report.cycle_starts + [report.iterations]
        for start, stop in zip(bounds, bounds[1:]):
            segment = report.residuals[start : stop + 1]
            for before, after in zip(segment, segment[1:]):
                assert after <= before * (1 + 1e-12) + 1e-15

    def test_scale_invariance(self, rng):
        """Test scaling f scales x and leaves the history unchanged."""
        f = random_field(rng, 8)
        x1, first = gmres(self.diagonal, None, f, tol=1e-9)
        x2, second = gmres(self.diagonal, None, 3.0 * f, tol=1e-9)
        assert first.iterations == second.iterations
        np.testing.assert_allclose(first.residuals, second.residuals, atol=1e-12)
        np.testing.assert_allclose(x2, 3.0 * x1, rtol=1e-10)

    def test_zero_rhs(self):
        """Test f == 0 returns zero without iterating."""
        apply_A = MagicMock()
        x, report = gmres(apply_A, None, np.zeros(5))
        assert np.all(x == 0)
        assert report.converged
        assert report.iterations == 0
        apply_A.assert_not_called()

    def test_exact_initial_guess(self, rng):
        """Test an exact initial guess needs no iterations."""
        x0 = random_field(rng, 8)
        f = self.diagonal @ x0
        _, report = gmres(self.diagonal, None, f, tol=1e-10, x0=x0)
        assert report.converged
        assert report.iterations == 0

    def test_iteration_budget(self, rng):
        """Test the solve stops at max_iter and reports not converged."""
        matrix = np.diag(np.arange(1.0, 51.0)).astype(complex)
        _, report = gmres(matrix, None, random_field(rng, 50), tol=1e-12, max_iter=5)
        assert not report.converged
        assert report.iterations == 5
        assert len(report.residuals) == 6
        assert report.status == "not_converged"

    def test_invalid_arguments(self, rng):
        """Test invalid parameters are rejected."""
        f = random_field(rng, 4)
        with pytest.raises(ConfigurationError):
            gmres(np.eye(4), None, f, tol=0.0)
        with pytest.raises(ConfigurationError):
            gmres(np.eye(4), None, f, restart=0)
        with pytest.raises(ConfigurationError):
            gmres(np.eye(4), None, f, max_iter=-1)

    def test_callback(self, rng):
        """Test the callback sees every iteration."""
        seen = []
        _, report = gmres(
            self.diagonal, None, random_field(rng, 8), tol=1e-10,
            callback=lambda k, r: seen.append((k, r)),
        )
        assert [k for k, _ in seen] == list(range(1, report.iterations + 1))
        assert [r for _, r in seen] == report.residuals[1:]

    def test_linear_operator_inputs(self, rng):
        """Test scipy linear operators are accepted for A and M."""
        f = random_field(rng, 8)
        inverse = aslinearoperator(np.linalg.inv(self.diagonal))
        x, report = gmres(aslinearoperator(self.diagonal), inverse, f, tol=1e-10)
        assert report.converged
        assert report.iterations == 1
        np.testing.assert_allclose(self.diagonal @ x, f)


class TestSolveReport:
    """Test SolveReport."""

    def test_row_columns(self):
        """Test the solver columns of a report row."""
        report = SolveReport(
            iterations=7,
            residuals=[1.0, 1e-4],
            converged=True,
            setup_time=1.5,
            solve_time=2.5,
            memory_bytes=1024,
            true_residual=2e-4,
        )
        assert report.as_row() == {
            "t_setup": 1.5,
            "n_iter": 7,
            "t_solve": 2.5,
            "final_residual": 2e-4,
            "peak_memory": 1024,
            "status": "converged",
        }

    def test_final_residual_falls_back_to_estimate(self):
        """Test the last estimate is used without a true residual."""
        assert SolveReport(residuals=[1.0, 0.5]).final_residual == 0.5
        assert np.isnan(SolveReport().final_residual)
