"""Tests for the command line interface."""
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

from helmholtz_sweep import __version__
from helmholtz_sweep.cli import main
from helmholtz_sweep.field_io import load_field, save_field
from helmholtz_sweep.krylov import SolveReport

from .conftest import random_field


def _make_result(converged: bool = True) -> MagicMock:
    """Create a test run result."""
    result = MagicMock()
    result.report = SolveReport(
        iterations=4, residuals=[1.0, 1e-4], converged=converged, true_residual=5e-4
    )
    result.row = {"key": "omega_over_2pi=4.0", "status": result.report.status}
    return result


class TestSolve:
    """Test the solve command."""

    def setup_method(self):
        """Set up test fixtures."""
        self.config_text = "velocity_seed = 0\nn = 9\n"

    def _write_config(self, tmp_path, text=None):
        path = tmp_path / "run.conf"
        path.write_text(self.config_text if text is None else text)
        return str(path)

    def test_converged(self, tmp_path, capsys):
        """Test a converged solve exits with 0."""
        with patch("helmholtz_sweep.cli.run", return_value=_make_result()) as mock_run:
            code = main(["solve", "--config", self._write_config(tmp_path), "--out", "o"])
        assert code == 0
        config, out = mock_run.call_args.args
        assert config["n"] == 9
        assert out == "o"
        assert "converged after 4 iterations" in capsys.readouterr().out

    def test_not_converged(self, tmp_path):
        """Test an unconverged solve exits with 2."""
        with patch("helmholtz_sweep.cli.run", return_value=_make_result(False)):
            assert main(["solve", "--config", self._write_config(tmp_path)]) == 2

    def test_invalid_config(self, tmp_path):
        """Test an invalid configuration exits with 1."""
        path = self._write_config(tmp_path, "n = 9\n")
        with patch("helmholtz_sweep.cli.run") as mock_run:
            assert main(["solve", "--config", path]) == 1
        mock_run.assert_not_called()

    def test_missing_config(self, tmp_path):
        """Test a missing file exits with 1."""
        assert main(["solve", "--config", str(tmp_path / "missing.conf")]) == 1


class TestStudy:
    """Test the study command."""

    def _run(self, tmp_path, statuses):
        path = tmp_path / "base.conf"
        path.write_text("velocity_seed = 0\n")
        rows = [{"key": f"row{i}", "status": s} for i, s in enumerate(statuses)]
        with patch("helmholtz_sweep.cli.sweep_study", return_value=rows) as mock_study:
            code = main(
                ["study", "--config", str(path), "--vary", "fronts=one,two", "--workers", "2"]
            )
        return code, mock_study

    def test_all_converged(self, tmp_path):
        """Test a fully converged study exits with 0."""
        code, mock_study = self._run(tmp_path, ["converged", "converged"])
        assert code == 0
        _, vary, _, workers = mock_study.call_args.args
        assert vary == [("fronts", ["one", "two"])]
        assert workers == 2

    def test_not_converged(self, tmp_path):
        """Test an unconverged row exits with 2."""
        code, _ = self._run(tmp_path, ["converged", "not_converged"])
        assert code == 2

    def test_failed(self, tmp_path):
        """Test a failed row exits with 1."""
        code, _ = self._run(tmp_path, ["failed", "not_converged"])
        assert code == 1

    def test_invalid_vary(self, tmp_path):
        """Test an unknown vary key exits with 1."""
        path = tmp_path / "base.conf"
        path.write_text("velocity_seed = 0\n")
        assert main(["study", "--config", str(path), "--vary", "speed=1"]) == 1


class TestSlice:
    """Test the slice command."""

    def test_slice(self, tmp_path, rng):
        """Test a plane of a stored field is exported."""
        u = random_field(rng, (3, 4, 5))
        source = save_field(tmp_path / "u.hsw", u)
        out = tmp_path / "cut.hsw"
        code = main(
            ["slice", "--in", str(source), "--plane", "x3", "--index", "2", "--out", str(out)]
        )
        assert code == 0
        np.testing.assert_array_equal(load_field(out, ndim=2), u[:, :, 2])
        assert out.with_suffix(".pgm").exists()

    def test_index_out_of_range(self, tmp_path, rng):
        """Test an index outside the field exits with 1."""
        source = save_field(tmp_path / "u.hsw", random_field(rng, (3, 4, 5)))
        code = main(
            ["slice", "--in", str(source), "--plane", "x1", "--index", "3",
             "--out", str(tmp_path / "cut.hsw")]
        )
        assert code == 1


class TestParser:
    """Test argument parsing."""

    def test_version(self, capsys):
        """Test --version prints the package version."""
        with pytest.raises(SystemExit) as err:
            main(["--version"])
        assert err.value.code == 0
        assert __version__ in capsys.readouterr().out

    def test_command_required(self):
        """Test a command must be given."""
        with pytest.raises(SystemExit):
            main([])
