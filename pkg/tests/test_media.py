"""Tests for grid, PML profile, velocity and source generation."""
import math

import numpy as np
import pytest

from helmholtz_sweep.exceptions import ConfigurationError
from helmholtz_sweep.media import (
    Grid3D,
    PmlProfile,
    VelocityField,
    make_source,
    make_velocity,
    sigma_at,
    stretch_at,
)


def _make_profile(b: int = 4, C: float = 25.0, faces=None, n: int = 15) -> PmlProfile:
    """Create a test PML profile."""
    kwargs = {} if faces is None else {"faces": frozenset(faces)}
    return PmlProfile(h=1.0 / (n + 1), b=b, C=C, **kwargs)


class TestGrid3D:
    """Test Grid3D."""

    def test_from_frequency(self):
        """Test grid sizing from frequency and points per wavelength."""
        grid = Grid3D.from_frequency(4, 8)
        assert grid.n == 31
        assert grid.h == 1 / 32
        assert grid.N == 31**3
        assert grid.omega == pytest.approx(8 * math.pi)
        # q cells per typical wavelength
        assert grid.wavelength / grid.h == pytest.approx(8)

    def test_spacing_closes_unit_interval(self):
        """Test h * (n + 1) == 1."""
        for n in (5, 7, 31, 63):
            grid = Grid3D(n=n, omega=1.0)
            assert grid.h * (n + 1) == 1.0

    def test_coordinates(self):
        """Test interior node coordinates."""
        grid = Grid3D(n=3, omega=1.0)
        np.testing.assert_allclose(grid.coordinates(), [0.25, 0.5, 0.75])

    def test_invalid_grid(self):
        """Test invalid sizes are rejected."""
        with pytest.raises(ConfigurationError):
            Grid3D(n=0, omega=1.0)
        with pytest.raises(ConfigurationError):
            Grid3D(n=5, omega=0.0)
        with pytest.raises(ConfigurationError):
            Grid3D.from_frequency(0.1, 8)


class TestPmlProfile:
    """Test the PML damping and stretching."""

    def setup_method(self):
        """Set up test fixtures."""
        self.pml = _make_profile()
        self.eta = self.pml.eta

    def test_sigma_at_eta_is_zero(self):
        """Test sigma vanishes at the inner edge of the layer."""
        assert sigma_at(self.eta, self.pml) == 0.0

    def test_sigma_at_face(self):
        """Test sigma at the face equals C / eta."""
        assert sigma_at(0.0, self.pml) == pytest.approx(self.pml.C / self.eta)

    def test_sigma_at_half_width(self):
        """Test sigma at eta / 2 equals C / (4 eta)."""
        assert sigma_at(self.eta / 2, self.pml) == pytest.approx(self.pml.C / (4 * self.eta))

    def test_sigma_zero_outside_layer(self):
        """Test sigma is zero beyond eta."""
        x = np.linspace(self.eta + 1e-9, 1.0, 50)
        assert np.all(sigma_at(x, self.pml) == 0.0)

    def test_sigma_continuous_at_eta(self):
        """Test continuity and flatness of sigma at eta."""
        delta = 1e-7
        assert sigma_at(self.eta - delta, self.pml) < 1e-9
        slope = (sigma_at(self.eta, self.pml) - sigma_at(self.eta - delta, self.pml)) / delta
        assert abs(slope) < 1e-3

    def test_stretch_outside_layer(self):
        """Test s == 1 where sigma vanishes."""
        assert stretch_at(0.5, 3, self.pml, 10.0) == 1 + 0j

    def test_stretch_at_face(self):
        """Test s at the face by direct substitution."""
        omega = 10.0
        expected = 1 / (1 + 1j * self.pml.C / (omega * self.eta))
        assert stretch_at(0.0, 3, self.pml, omega) == pytest.approx(expected)

    def test_stretch_half_integer_point(self):
        """Test s at a half-integer coordinate matches the pointwise formula."""
        omega = 10.0
        x = 1.5 * self.pml.h
        expected = 1 / (1 + 1j * sigma_at(x, self.pml) / omega)
        assert stretch_at(x, 2, self.pml, omega) == pytest.approx(expected)

    def test_stretch_modulus_bounded(self):
        """Test |s| <= 1 everywhere."""
        x = np.linspace(0, 1, 101)
        for axis in (1, 2, 3):
            assert np.all(np.abs(stretch_at(x, axis, self.pml, 3.0)) <= 1.0)

    def test_axis_without_pml(self):
        """Test an axis with no PML faces has s == 1."""
        pml = _make_profile(faces=["x2_low", "x3_low"])
        x = np.linspace(0, 1, 11)
        assert np.all(stretch_at(x, 1, pml, 3.0) == 1.0)

    def test_high_face_mirrors_low_face(self):
        """Test the high face profile is the mirror image of the low one."""
        low = _make_profile(faces=["x3_low"])
        high = _make_profile(faces=["x3_high"])
        x = np.linspace(0, 0.3, 13)
        np.testing.assert_allclose(
            high.stretch(1.0 - x, 3, 5.0), low.stretch(x, 3, 5.0), rtol=1e-12
        )

    def test_with_layers(self):
        """Test auxiliary profiles keep C and h."""
        aux = self.pml.with_layers(2)
        assert aux.b == 2
        assert aux.C == self.pml.C
        assert aux.eta == pytest.approx(2 * self.pml.h)

    def test_validate_for_sweep(self):
        """Test the faces needed by the sweep are enforced."""
        self.pml.validate_for_sweep(two_front=True)
        with pytest.raises(ConfigurationError):
            _make_profile(faces=["x3_low"]).validate_for_sweep()

    def test_invalid_profile(self):
        """Test invalid profiles are rejected."""
        with pytest.raises(ConfigurationError):
            _make_profile(faces=["x4_low"])
        with pytest.raises(ConfigurationError):
            _make_profile(C=0.0)
        with pytest.raises(ConfigurationError):
            self.pml.stretch(0.5, 4, 1.0)


class TestMakeVelocity:
    """Test velocity generators."""

    def setup_method(self):
        """Set up test fixtures."""
        self.grid = Grid3D(n=15, omega=2 * math.pi)

    def test_constant(self):
        """Test constant velocity."""
        vel = make_velocity("constant", self.grid, {"c0": 1.0})
        assert np.all(vel.c == 1.0)
        assert vel.c_min == vel.c_max == 1.0

    def test_lens_slowest_at_center(self):
        """Test the converging lens has its minimum at the center node."""
        vel = make_velocity("lens", self.grid)
        assert np.unravel_index(np.argmin(vel.c), vel.shape) == (7, 7, 7)
        assert vel.c_max <= 4 / 3

    def test_waveguide_invariant_along_x3(self):
        """Test the waveguide does not vary along x3."""
        vel = make_velocity("waveguide", self.grid)
        assert np.all(vel.c == vel.c[:, :, :1])
        assert np.unravel_index(np.argmin(vel.c[:, :, 0]), (15, 15)) == (7, 7)

    def test_random_is_reproducible(self):
        """Test a fixed seed gives identical fields."""
        first = make_velocity("random", self.grid, {"seed": 7})
        second = make_velocity("random", self.grid, {"seed": 7})
        other = make_velocity("random", self.grid, {"seed": 8})
        np.testing.assert_array_equal(first.c, second.c)
        assert not np.array_equal(first.c, other.c)

    def test_random_bounds(self):
        """Test random velocity stays within its clamp."""
        vel = make_velocity("random", self.grid, {"seed": 3, "amplitude": 2.0})
        assert vel.c_min >= 0.5
        assert vel.c_max <= 2.0

    def test_random_requires_seed(self):
        """Test random velocity without a seed is rejected."""
        with pytest.raises(ConfigurationError):
            make_velocity("random", self.grid)

    def test_unknown_kind(self):
        """Test unknown kinds are rejected."""
        with pytest.raises(ConfigurationError):
            make_velocity("marmousi", self.grid)

    def test_field_is_immutable(self):
        """Test the stored array cannot be written."""
        vel = make_velocity("constant", self.grid)
        with pytest.raises(ValueError):
            vel.c[0, 0, 0] = 2.0

    def test_nonpositive_velocity_rejected(self):
        """Test the positivity bound."""
        with pytest.raises(ConfigurationError):
            VelocityField(c=np.array([[[1.0, 0.0]]]))


class TestMakeSource:
    """Test source generators."""

    def setup_method(self):
        """Set up test fixtures."""
        self.grid = Grid3D(n=15, omega=2 * math.pi)

    def test_delta(self):
        """Test a delta source is one at its node only."""
        src = make_source("delta", self.grid, {"node": (1, 2, 3)})
        assert src.f[1, 2, 3] == 1.0
        assert np.count_nonzero(src.f) == 1

    def test_point_gaussian_peak(self):
        """Test the point source peaks at the node nearest its center."""
        src = make_source("point_gaussian", self.grid, {"center": (0.5, 0.5, 0.25)})
        assert np.unravel_index(np.argmax(np.abs(src.f)), src.shape) == (7, 7, 3)
        assert np.all(src.f.imag == 0)
        assert np.all(src.f.real > 0)

    def test_wave_packet_phase_gradient(self):
        """Test the packet phase advances along its direction."""
        grid = Grid3D.from_frequency(4, 8)
        direction = np.array([0.0, 1.0, 1.0]) / math.sqrt(2)
        src = make_source(
            "wave_packet", grid, {"center": (0.5, 0.25, 0.25), "direction": direction}
        )
        i, j, k = 15, 7, 7
        f = src.f
        gradient = np.array(
            [
                np.angle(f[i + 1, j, k] / f[i, j, k]),
                np.angle(f[i, j + 1, k] / f[i, j, k]),
                np.angle(f[i, j, k + 1] / f[i, j, k]),
            ]
        )
        gradient /= np.linalg.norm(gradient)
        assert np.linalg.norm(gradient - direction) <= 0.05

    def test_center_outside_cube(self):
        """Test centers outside the unit cube are rejected."""
        with pytest.raises(ConfigurationError):
            make_source("point_gaussian", self.grid, {"center": (0.5, 0.5, 1.5)})

    def test_delta_outside_grid(self):
        """Test delta nodes outside the grid are rejected."""
        with pytest.raises(ConfigurationError):
            make_source("delta", self.grid, {"node": (0, 0, 15)})

    def test_confined_to_interior(self):
        """Test the PML layers carry no source."""
        pml = PmlProfile(h=self.grid.h, b=3)
        src = make_source("point_gaussian", self.grid, {"center": (0.5, 0.5, 0.1)}, pml=pml)
        assert np.all(src.f[:, :, :3] == 0)
        assert np.all(src.f[:, :, -3:] == 0)
        assert np.all(src.f[:3] == 0)
        assert np.any(src.f != 0)

    def test_unknown_kind(self):
        """Test unknown kinds are rejected."""
        with pytest.raises(ConfigurationError):
            make_source("dipole", self.grid)
