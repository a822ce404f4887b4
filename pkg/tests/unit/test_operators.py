"""
Unit tests for the periodic spectral operators
"""

import math

import numpy as np
import pytest

from modules.shallow_water.errors import NonZeroMeanError, ValidationError
from modules.shallow_water.models import Axis, Field2D, Grid2D
from modules.shallow_water.operators import (
    GridCalculus, antideriv_x, antiderivative_values, check_zero_row_mean, dealias, deriv,
    derivative_multiplier, derivative_values, random_band_limited, wavenumbers
)


def _trig_field(grid, func):
    return Field2D.from_function(grid, func)


class TestDerivatives:
    """Test spectral derivatives"""

    @pytest.mark.unit
    def test_first_derivative(self, square_grid):
        """Test d/dx sin(2x + y) = 2 cos(2x + y)"""
        u = _trig_field(square_grid, lambda x, y: np.sin(2 * x + y))
        expected = _trig_field(square_grid, lambda x, y: 2 * np.cos(2 * x + y))
        assert np.max(np.abs(deriv(u, Axis.X, 1).values - expected.values)) < 1e-12

    @pytest.mark.unit
    def test_high_order_y(self, square_grid):
        """Test the fourth y-derivative of cos(3y)"""
        u = _trig_field(square_grid, lambda x, y: np.cos(3 * y) + 0 * x)
        result = deriv(u, Axis.Y, 4).values
        assert np.max(np.abs(result - 81 * u.values)) < 1e-9

    @pytest.mark.unit
    def test_mixed_derivative(self, square_grid):
        """Test d^2/dxdy of sin(x) sin(y)"""
        u = _trig_field(square_grid, lambda x, y: np.sin(x) * np.sin(y))
        result = derivative_values(u.values, square_grid, order_x=1, order_y=1)
        x, y = square_grid.mesh()
        assert np.max(np.abs(result - np.cos(x) * np.cos(y))) < 1e-12

    @pytest.mark.unit
    @pytest.mark.parametrize("order", [0, 7])
    def test_order_out_of_range(self, square_grid, order):
        """Test derivative orders outside [1, 6] are rejected"""
        u = Field2D.zeros(square_grid)
        with pytest.raises(ValidationError):
            deriv(u, Axis.X, order)

    @pytest.mark.unit
    def test_odd_order_drops_nyquist(self, square_grid):
        """Test the Nyquist row vanishes for odd x-derivatives only"""
        table = wavenumbers(square_grid)
        odd = np.broadcast_to(derivative_multiplier(square_grid, order_x=1), (64, 33))
        even = np.broadcast_to(derivative_multiplier(square_grid, order_x=2), (64, 33))
        nyquist_row = int(np.argmax(table.nyquist_x[:, 0]))
        assert np.all(odd[nyquist_row] == 0)
        assert np.all(even[nyquist_row] != 0)


class TestAntiderivative:
    """Test the zero-mean periodic x-antiderivative"""

    @pytest.mark.unit
    def test_inverts_derivative(self, plane_field):
        """Test d/dx of the antiderivative gives back the field"""
        integral = antideriv_x(plane_field)
        assert abs(integral.values.mean(axis=0)).max() < 1e-12
        recovered = deriv(integral, Axis.X, 1)
        assert np.max(np.abs(recovered.values - plane_field.values)) < 1e-12

    @pytest.mark.unit
    def test_known_antiderivative(self, square_grid):
        """Test the antiderivative of cos(x) is sin(x)"""
        u = _trig_field(square_grid, lambda x, y: np.cos(x) + 0 * y)
        twice = antiderivative_values(u.values, square_grid, times=2)
        assert np.max(np.abs(twice + u.values)) < 1e-12

    @pytest.mark.unit
    def test_nonzero_mean_rejected(self, square_grid):
        """Test a row with nonzero mean raises and names the row"""
        u = _trig_field(square_grid, lambda x, y: np.sin(x) + np.where(y == square_grid.y[5], 0.3, 0.0))
        with pytest.raises(NonZeroMeanError) as exc_info:
            antideriv_x(u)
        assert exc_info.value.row == 5
        assert exc_info.value.mean == pytest.approx(0.3)

    @pytest.mark.unit
    def test_zero_field_passes(self, square_grid):
        """Test the all-zero field has no mean to reject"""
        check_zero_row_mean(np.zeros(square_grid.shape))


class TestDealias:
    """Test the two-thirds filter"""

    @pytest.mark.unit
    def test_removes_high_modes(self, square_grid):
        """Test mode 30 is removed and mode 3 survives"""
        low = _trig_field(square_grid, lambda x, y: np.sin(3 * x) + 0 * y)
        high = _trig_field(square_grid, lambda x, y: np.sin(30 * x) + 0 * y)
        combined = low.like(low.values + high.values)
        assert np.max(np.abs(dealias(combined).values - low.values)) < 1e-12


class TestRandomBandLimited:
    """Test random smooth fields"""

    @pytest.mark.unit
    def test_scaled_and_zero_mean(self, square_grid, rng):
        """Test amplitude scaling and zero x-means"""
        field = random_band_limited(square_grid, rng, amplitude=0.5)
        assert field.max_abs() == pytest.approx(0.5)
        assert np.max(np.abs(field.values.mean(axis=0))) < 1e-14

    @pytest.mark.unit
    def test_band_limit(self, rng):
        """Test no modes above the requested band"""
        grid = Grid2D(32, 32, 2 * math.pi, 2 * math.pi)
        field = random_band_limited(grid, rng, max_mode_x=2, max_mode_y=3)
        spectrum = np.abs(np.fft.rfft2(field.values))
        assert spectrum[3:-2, :].max() < 1e-10
        assert spectrum[:, 4:].max() < 1e-10


class TestGridCalculus:
    """Test the per-state derivative cache"""

    @pytest.mark.unit
    def test_caches_derivatives(self, plane_field):
        """Test repeated requests return the same array"""
        calculus = GridCalculus(plane_field.values, None, plane_field.grid)
        assert calculus.d(1, 0) is calculus.d(1, 0)
        assert calculus.d(0, 0) is calculus.u
        assert calculus.ix_d(1, 0, 1) is calculus.ix_d(1, 0, 1)
        assert np.max(np.abs(calculus.ix_d(1, 0, 1) - plane_field.values)) < 1e-12

    @pytest.mark.unit
    def test_missing_time_derivative(self, plane_field):
        """Test dt() without u_t raises"""
        calculus = GridCalculus(plane_field.values, None, plane_field.grid)
        with pytest.raises(ValidationError):
            calculus.dt(1, 0)
