"""
Periodic spectral operators: derivatives, the nonlocal x-antiderivative and dealiasing
"""

import logging
import threading
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import NonZeroMeanError, ValidationError
from .models import Axis, Field2D, Grid2D

logger = logging.getLogger(__name__)

MAX_DERIVATIVE_ORDER = 6
ZERO_MEAN_TOLERANCE = 1e-10
DEALIAS_FRACTION = 2.0 / 3.0


class _Wavenumbers:
    """Angular wavenumbers and mode indices for one grid (rfft along y)"""

    def __init__(self, grid: Grid2D):
        self.modes_x = np.fft.fftfreq(grid.nx, d=1.0 / grid.nx)[:, None]
        self.modes_y = np.fft.rfftfreq(grid.ny, d=1.0 / grid.ny)[None, :]
        self.kx = 2.0 * np.pi * self.modes_x / grid.length_x
        self.ky = 2.0 * np.pi * self.modes_y / grid.length_y
        self.nyquist_x = np.abs(self.modes_x) == grid.nx // 2
        self.nyquist_y = np.abs(self.modes_y) == grid.ny // 2
        self.dealias_mask = ((np.abs(self.modes_x) <= DEALIAS_FRACTION * grid.nx / 2)
                             & (np.abs(self.modes_y) <= DEALIAS_FRACTION * grid.ny / 2))


_cache: Dict[Grid2D, _Wavenumbers] = {}
_cache_lock = threading.Lock()


def wavenumbers(grid: Grid2D) -> _Wavenumbers:
    """Get or create the cached wavenumber tables of a grid"""
    table = _cache.get(grid)
    if table is None:
        with _cache_lock:
            # Double-check locking pattern
            table = _cache.get(grid)
            if table is None:
                table = _Wavenumbers(grid)
                _cache[grid] = table
                logger.debug(f"[OPERATORS] Built wavenumber tables for {grid}")
    return table


def forward(values: np.ndarray) -> np.ndarray:
    return np.fft.rfft2(values)


def inverse(spectrum: np.ndarray, grid: Grid2D) -> np.ndarray:
    return np.fft.irfft2(spectrum, s=grid.shape)


def derivative_multiplier(grid: Grid2D, order_x: int = 0, order_y: int = 0) -> np.ndarray:
    """(i kx)^order_x (i ky)^order_y with odd-order Nyquist modes removed"""
    for order in (order_x, order_y):
        if not 0 <= order <= MAX_DERIVATIVE_ORDER:
            raise ValidationError(f"Derivative order {order} outside [0, {MAX_DERIVATIVE_ORDER}]")
    w = wavenumbers(grid)
    multiplier = (1j * w.kx) ** order_x * (1j * w.ky) ** order_y
    if order_x % 2:
        multiplier = np.where(w.nyquist_x, 0.0, multiplier)
    if order_y % 2:
        multiplier = np.where(w.nyquist_y, 0.0, multiplier)
    return multiplier


def derivative_values(values: np.ndarray, grid: Grid2D, order_x: int = 0, order_y: int = 0) -> np.ndarray:
    """Mixed spectral derivative of a sample array"""
    if order_x == 0 and order_y == 0:
        return np.array(values, dtype=np.float64)
    spectrum = forward(values) * derivative_multiplier(grid, order_x, order_y)
    return inverse(spectrum, grid)


def deriv(field: Field2D, axis: Axis, order: int) -> Field2D:
    """Spectral derivative of the given order along one axis"""
    if not 1 <= order <= MAX_DERIVATIVE_ORDER:
        raise ValidationError(f"Derivative order must lie in [1, {MAX_DERIVATIVE_ORDER}], got {order}")
    if axis is Axis.X:
        return field.like(derivative_values(field.values, field.grid, order_x=order))
    return field.like(derivative_values(field.values, field.grid, order_y=order))


def check_zero_row_mean(values: np.ndarray, tolerance: float = ZERO_MEAN_TOLERANCE, what: str = "field"):
    """Raise NonZeroMeanError when some y-row has a nonzero mean over x"""
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    if scale == 0.0:
        return
    row_means = values.mean(axis=0)
    worst = int(np.argmax(np.abs(row_means)))
    if abs(row_means[worst]) > tolerance * scale:
        raise NonZeroMeanError(
            f"{what} has x-mean {row_means[worst]:.3e} on row {worst} "
            f"(limit {tolerance:g} x max|{what}| = {tolerance * scale:.3e}); "
            f"no periodic x-antiderivative exists",
            row=worst, mean=float(row_means[worst]), tolerance=tolerance)


def antiderivative_values(values: np.ndarray, grid: Grid2D, times: int = 1,
                          tolerance: float = ZERO_MEAN_TOLERANCE, what: str = "field") -> np.ndarray:
    """Zero-mean periodic x-antiderivative applied ``times`` times"""
    w = wavenumbers(grid)
    kx = np.where(w.modes_x == 0, 1.0, w.kx)
    inverse_symbol = np.where(w.modes_x == 0, 0.0, 1.0 / (1j * kx))
    inverse_symbol = np.where(w.nyquist_x, 0.0, inverse_symbol)
    result = np.asarray(values, dtype=np.float64)
    for _ in range(times):
        check_zero_row_mean(result, tolerance, what)
        result = inverse(forward(result) * inverse_symbol, grid)
    return result


def antideriv_x(field: Field2D) -> Field2D:
    """Unique zero-mean periodic antiderivative in x"""
    return field.like(antiderivative_values(field.values, field.grid))


def dealias_values(values: np.ndarray, grid: Grid2D) -> np.ndarray:
    return inverse(forward(values) * wavenumbers(grid).dealias_mask, grid)


def dealias(field: Field2D) -> Field2D:
    """Zero every mode above 2/3 of the Nyquist limit on either axis"""
    return field.like(dealias_values(field.values, field.grid))


def random_band_limited(grid: Grid2D, rng: np.random.Generator, max_mode_x: int = 4,
                        max_mode_y: int = 4, amplitude: float = 1.0,
                        zero_x_mean: bool = True) -> Field2D:
    """Smooth random field with modes |n_x| <= max_mode_x, |n_y| <= max_mode_y"""
    w = wavenumbers(grid)
    spectrum = np.zeros((grid.nx, grid.ny // 2 + 1), dtype=complex)
    band = (np.abs(w.modes_x) <= max_mode_x) & (np.abs(w.modes_y) <= max_mode_y)
    band = np.broadcast_to(band, spectrum.shape)
    noise = rng.standard_normal(spectrum.shape) + 1j * rng.standard_normal(spectrum.shape)
    spectrum[band] = noise[band]
    if zero_x_mean:
        spectrum[np.broadcast_to(w.modes_x == 0, spectrum.shape)] = 0.0
    values = inverse(spectrum, grid)
    scale = np.max(np.abs(values))
    if scale > 0:
        values = amplitude * values / scale
    return Field2D(grid, values)


class GridCalculus:
    """Derivative and antiderivative cache for one state (u, u_t) on a grid.

    Residual operators are written once against this interface and against
    the plane-wave calculus of the equations module.
    """

    mode = "grid"

    def __init__(self, u: np.ndarray, u_t: Optional[np.ndarray], grid: Grid2D):
        self.grid = grid
        self.u = np.asarray(u, dtype=np.float64)
        self.u_t = None if u_t is None else np.asarray(u_t, dtype=np.float64)
        self._spectrum = forward(self.u)
        self._spectrum_t = None if self.u_t is None else forward(self.u_t)
        self._derivatives: Dict[Tuple[int, int], np.ndarray] = {}
        self._time_derivatives: Dict[Tuple[int, int], np.ndarray] = {}
        self._antiderivatives: Dict[Tuple[int, int, int], np.ndarray] = {}

    def d(self, nx: int = 0, ny: int = 0) -> np.ndarray:
        key = (nx, ny)
        if key not in self._derivatives:
            if key == (0, 0):
                self._derivatives[key] = self.u
            else:
                multiplier = derivative_multiplier(self.grid, nx, ny)
                self._derivatives[key] = inverse(self._spectrum * multiplier, self.grid)
        return self._derivatives[key]

    def dt(self, nx: int = 0, ny: int = 0) -> np.ndarray:
        if self.u_t is None:
            raise ValidationError("u_t is required for this residual")
        key = (nx, ny)
        if key not in self._time_derivatives:
            if key == (0, 0):
                self._time_derivatives[key] = self.u_t
            else:
                multiplier = derivative_multiplier(self.grid, nx, ny)
                self._time_derivatives[key] = inverse(self._spectrum_t * multiplier, self.grid)
        return self._time_derivatives[key]

    def ix(self, values: np.ndarray, times: int = 1) -> np.ndarray:
        return antiderivative_values(values, self.grid, times)

    def ix_d(self, nx: int, ny: int, times: int) -> np.ndarray:
        key = (nx, ny, times)
        if key not in self._antiderivatives:
            self._antiderivatives[key] = self.ix(self.d(nx, ny), times)
        return self._antiderivatives[key]

    def dx(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        return derivative_values(values, self.grid, order_x=order)

    def dy(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        return derivative_values(values, self.grid, order_y=order)
