"""
Registry of single wave equations with residual evaluation

Each equation is a list of labelled terms. A term couples a coefficient (a
function of the physical parameters) with a builder that evaluates the term
against a calculus: either GridCalculus (spectral, on a periodic grid) or
PlaneWaveCalculus (exact xi-derivatives of a closed-form family).
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .bathymetry import Bathymetry, BathymetrySample, DEFAULT_EXCLUDED_MARGIN, bottom_term_values
from .errors import ContractError, NonZeroMeanError, ValidationError
from .models import (EquationId, Field2D, FrameDirection, PhysicalParams, ResidualMode,
                     ResidualReport, SolutionFamily)
from .operators import ZERO_MEAN_TOLERANCE, GridCalculus
from .solutions import period_xi, profile_derivative, xi_samples

logger = logging.getLogger(__name__)

DEFAULT_XI_SAMPLES = 2048


@dataclass(frozen=True)
class EquationOptions:
    """Variant switches.

    include_gamma2: keep the nested -(gamma^2/8beta^2) transverse term of the
        fifth-order equations.
    printed_quartic: add the (3/2) u I[u^2 u_yy] term to the Gardner bracket.
    """
    include_gamma2: bool = True
    printed_quartic: bool = False


DEFAULT_OPTIONS = EquationOptions()


class PlaneWaveCalculus:
    """Exact derivatives of u(xi) sampled over one period (or the soliton window).

    d_t -> -omega d/dxi, d_x -> k d/dxi, d_y -> l d/dxi; every x-antiderivative
    is (1/k) times a xi-antiderivative, with the zero-mean gauge for periodic
    families and the lower limit at -infinity for decaying ones.
    """

    mode = "plane-wave"

    def __init__(self, s: SolutionFamily, samples: int = DEFAULT_XI_SAMPLES):
        self.family = s
        self.xi = xi_samples(s, samples)
        self.periodic = period_xi(s) is not None
        self.k, self.l, self.omega = s.wave.k, s.wave.l, s.wave.omega
        self._profile: Dict[int, np.ndarray] = {}
        self.u = self._derivative(0)
        self.gauge = float(np.mean(self.u)) if self.periodic else s.wave.offset_b
        self._spacing = self.xi[1] - self.xi[0]

    def _derivative(self, order: int) -> np.ndarray:
        if order not in self._profile:
            self._profile[order] = profile_derivative(self.family, self.xi, order)
        return self._profile[order]

    def d(self, nx: int = 0, ny: int = 0) -> np.ndarray:
        if nx == 0 and ny == 0:
            return self.u
        return self.k ** nx * self.l ** ny * self._derivative(nx + ny)

    def dt(self, nx: int = 0, ny: int = 0) -> np.ndarray:
        return -self.omega * self.k ** nx * self.l ** ny * self._derivative(nx + ny + 1)

    def ix_d(self, nx: int, ny: int, times: int) -> np.ndarray:
        order = nx + ny - times
        if order < 0:
            raise ValidationError(f"Cannot integrate a derivative of order {nx + ny} {times} times exactly")
        scale = self.k ** nx * self.l ** ny / self.k ** times
        if order == 0:
            return scale * (self.u - self.gauge)
        return scale * self._derivative(order)

    def _antiderivative(self, values: np.ndarray) -> np.ndarray:
        n = values.size
        modes = np.fft.rfftfreq(n, d=1.0 / n)
        wavenumber = 2.0 * np.pi * modes / (n * self._spacing)
        mean = float(np.mean(values))
        if self.periodic:
            scale = float(np.max(np.abs(values))) or 1.0
            if abs(mean) > ZERO_MEAN_TOLERANCE * scale:
                raise NonZeroMeanError(f"xi-integrand has mean {mean:.3e}; no periodic antiderivative",
                                       row=0, mean=mean, tolerance=ZERO_MEAN_TOLERANCE)
        spectrum = np.fft.rfft(values - mean)
        symbol = np.zeros_like(wavenumber, dtype=complex)
        symbol[1:] = 1.0 / (1j * wavenumber[1:])
        if n % 2 == 0:
            symbol[-1] = 0.0
        primitive = np.fft.irfft(spectrum * symbol, n=n)
        if self.periodic:
            return primitive
        # lower limit at -infinity: the window starts in the decayed tail
        return primitive - primitive[0] + mean * (self.xi - self.xi[0])

    def ix(self, values: np.ndarray, times: int = 1) -> np.ndarray:
        result = np.asarray(values, dtype=np.float64)
        for _ in range(times):
            result = self._antiderivative(result) / self.k
        return result


TermBuilder = Callable[[object], np.ndarray]
Coefficient = Callable[[PhysicalParams, EquationOptions], float]

TERM_BUILDERS: Dict[str, TermBuilder] = {
    "u_t": lambda c: c.dt(),
    "u_x": lambda c: c.d(1, 0),
    "u*u_x": lambda c: c.d() * c.d(1, 0),
    "u_3x": lambda c: c.d(3, 0),
    "I[u_yy]": lambda c: c.ix_d(0, 2, 1),
    "u_5x": lambda c: c.d(5, 0),
    "u_x2y": lambda c: c.d(1, 2),
    "I3[u_4y]": lambda c: c.ix_d(0, 4, 3),
    "u^2*u_x": lambda c: c.d() ** 2 * c.d(1, 0),
    "I[u_y^2+u*u_yy]": lambda c: c.ix(c.d(0, 1) ** 2 + c.d() * c.d(0, 2)),
    "u*I[u_yy]": lambda c: c.d() * c.ix_d(0, 2, 1),
    "u*I[u^2*u_yy]": lambda c: c.d() * c.ix(c.d() ** 2 * c.d(0, 2)),
    "u_y*I[u_y]": lambda c: c.d(0, 1) * c.ix_d(0, 1, 1),
    "u_x*I2[u_yy]": lambda c: c.d(1, 0) * c.ix_d(0, 2, 2),
    "u_xt": lambda c: c.dt(1, 0),
    "u_2x": lambda c: c.d(2, 0),
    "(u*u_x)_x": lambda c: c.d(1, 0) ** 2 + c.d() * c.d(2, 0),
    "u_4x": lambda c: c.d(4, 0),
    "u_yy": lambda c: c.d(0, 2),
    "u_6x": lambda c: c.d(6, 0),
    "u_2x2y": lambda c: c.d(2, 2),
    "I2[u_4y]": lambda c: c.ix_d(0, 4, 2),
}

GARDNER_BRACKET_LABELS = ("I[u_y^2+u*u_yy]", "u*I[u_yy]", "u*I[u^2*u_yy]", "u_y*I[u_y]", "u_x*I2[u_yy]")


def _third(p: PhysicalParams, o: EquationOptions) -> float:
    return p.beta * (1.0 - 3.0 * p.tau) / 6.0


def _fifth(p: PhysicalParams, o: EquationOptions) -> float:
    return p.beta ** 2 * (19.0 - 30.0 * p.tau - 45.0 * p.tau ** 2) / 360.0


def _mixed(p: PhysicalParams, o: EquationOptions) -> float:
    return p.gamma * (1.0 - 3.0 * p.tau) / 4.0


def _gamma2(p: PhysicalParams, o: EquationOptions) -> float:
    return -p.gamma ** 2 / (8.0 * p.beta ** 2) if o.include_gamma2 else 0.0


def _transverse(p: PhysicalParams, o: EquationOptions) -> float:
    return p.gamma / (2.0 * p.beta)


def _bracket(weight: float) -> Coefficient:
    return lambda p, o: weight * p.alpha * p.gamma / p.beta


def _one(p: PhysicalParams, o: EquationOptions) -> float:
    return 1.0


_KDV = [
    ("u_t", _one),
    ("u_x", _one),
    ("u*u_x", lambda p, o: 1.5 * p.alpha),
    ("u_3x", lambda p, o: p.beta / 6.0),
    ("I[u_yy]", _transverse),
]

_FIFTH = [
    ("u_t", _one),
    ("u_x", _one),
    ("u_3x", _third),
    ("I[u_yy]", _transverse),
    ("u*u_x", lambda p, o: 1.5 * p.alpha),
    ("u_5x", _fifth),
    ("u_x2y", _mixed),
    ("I3[u_4y]", _gamma2),
]

_GARDNER = [
    ("u_t", _one),
    ("u_x", _one),
    ("u*u_x", lambda p, o: 1.5 * p.alpha),
    ("I[u_yy]", _transverse),
    ("u^2*u_x", lambda p, o: -0.375 * p.alpha ** 2),
    ("u_3x", _third),
    ("I[u_y^2+u*u_yy]", _bracket(0.125)),
    ("u*I[u_yy]", _bracket(0.125)),
    ("u*I[u^2*u_yy]", lambda p, o: 1.5 * p.alpha * p.gamma / p.beta if o.printed_quartic else 0.0),
    ("u_y*I[u_y]", _bracket(1.0)),
    ("u_x*I2[u_yy]", _bracket(-0.5)),
    ("I3[u_4y]", lambda p, o: -p.gamma ** 2 / (8.0 * p.beta ** 2)),
]

EQUATION_TERMS: Dict[EquationId, List[Tuple[str, Coefficient]]] = {
    EquationId.KDV_2P1: _KDV,
    EquationId.KP_FIXED_FRAME: [
        ("u_xt", _one),
        ("u_2x", _one),
        ("(u*u_x)_x", lambda p, o: 1.5 * p.alpha),
        ("u_4x", lambda p, o: p.beta / 6.0),
        ("u_yy", _transverse),
    ],
    EquationId.KP_CLASSICAL: [
        ("u_xt", _one),
        ("(u*u_x)_x", lambda p, o: 6.0),
        ("u_4x", _one),
        ("u_yy", lambda p, o: p.transverse_lambda),
    ],
    EquationId.KP_MOVING: [
        ("u_xt", _one),
        ("(u*u_x)_x", lambda p, o: 6.0),
        ("u_4x", lambda p, o: p.beta / p.alpha),
        ("u_yy", lambda p, o: (4.0 / 3.0) * p.gamma / (p.alpha * p.beta)),
    ],
    EquationId.FIFTH_KDV_2P1: _FIFTH,
    # exact x-derivative of the fifth-order (2+1)-D equation
    EquationId.FIFTH_KP_TYPE: [
        ("u_xt", _one),
        ("u_2x", _one),
        ("u_4x", _third),
        ("u_yy", _transverse),
        ("(u*u_x)_x", lambda p, o: 1.5 * p.alpha),
        ("u_6x", _fifth),
        ("u_2x2y", _mixed),
        ("I2[u_4y]", _gamma2),
    ],
    EquationId.GARDNER_2P1: _GARDNER,
    EquationId.GARDNER_1P1: [
        ("u_t", _one),
        ("u_x", _one),
        ("u*u_x", lambda p, o: 1.5 * p.alpha),
        ("u^2*u_x", lambda p, o: -0.375 * p.alpha ** 2),
        ("u_3x", _third),
    ],
}


def coefficients(eq: EquationId, p: PhysicalParams,
                 options: EquationOptions = DEFAULT_OPTIONS) -> List[Tuple[str, float]]:
    """Every named coefficient as (term label, value); bottom equations add 'bottom'"""
    table = [(label, float(coefficient(p, options)))
             for label, coefficient in EQUATION_TERMS[eq.flat_counterpart]]
    if eq.is_bottom:
        table.append(("bottom", -0.25 * p.delta))
    return table


def kp_lambda(eq: EquationId, p: PhysicalParams) -> float:
    """Coefficient of u_yy in the x-differentiated (KP) forms"""
    if not eq.is_kp_form:
        raise ContractError(f"{eq.value} is not written in KP form")
    return dict(coefficients(eq, p))["u_yy"]


def term_values(label: str, calculus) -> np.ndarray:
    return TERM_BUILDERS[label](calculus)


def gardner_bracket_terms(calculus, printed_quartic: bool = False) -> Dict[str, np.ndarray]:
    """The five integral sub-terms of the Gardner alpha*gamma/beta bracket"""
    labels = [label for label in GARDNER_BRACKET_LABELS
              if printed_quartic or label != "u*I[u^2*u_yy]"]
    return {label: term_values(label, calculus) for label in labels}


def spatial_labels(eq: EquationId) -> List[str]:
    return [label for label, _ in EQUATION_TERMS[eq.flat_counterpart] if label not in ("u_t", "u_xt")]


def residual_values(eq: EquationId, calculus, p: PhysicalParams,
                    options: EquationOptions = DEFAULT_OPTIONS,
                    include_time: bool = True) -> np.ndarray:
    """Sum of coefficient * term over the flat part of the equation"""
    total = np.zeros_like(calculus.u)
    for label, coefficient in EQUATION_TERMS[eq.flat_counterpart]:
        if not include_time and label in ("u_t", "u_xt"):
            continue
        value = coefficient(p, options)
        if value == 0.0:
            continue
        total = total + value * term_values(label, calculus)
    return total


def _contract_plane(eq: EquationId, s: SolutionFamily):
    if eq.is_bottom:
        raise ContractError(f"{eq.value} needs a bathymetry; plane-wave residuals are flat-bottom only")
    kp_equations = (EquationId.KP_CLASSICAL, EquationId.KP_MOVING)
    if s.kind.is_kp and eq not in kp_equations:
        raise ContractError(f"{s.kind.value} carries KP-frame coefficients; pair it with a KP equation")
    if eq is EquationId.KP_CLASSICAL and not s.kind.is_kp:
        raise ContractError(f"{eq.value} has a free lambda; pair it with a KP family")


def summarize_residual(eq: EquationId, values: np.ndarray, locate, mode: ResidualMode,
            mask: Optional[np.ndarray] = None, **extra) -> ResidualReport:
    considered = values if mask is None else np.where(mask, values, 0.0)
    count = values.size if mask is None else int(np.count_nonzero(mask))
    magnitude = np.abs(considered)
    index = int(np.argmax(magnitude))
    max_abs = float(magnitude.ravel()[index])
    rms = float(math.sqrt(np.sum(considered ** 2) / max(count, 1)))
    return ResidualReport(equation=eq, max_abs=max_abs, rms=min(rms, max_abs),
                          location_of_max=locate(index), mode=mode, samples=count, **extra)


def residual_plane(eq: EquationId, s: SolutionFamily, xi_samples: int = DEFAULT_XI_SAMPLES,
                   options: EquationOptions = DEFAULT_OPTIONS) -> ResidualReport:
    """Exact xi-reduced residual of a flat equation on a closed-form family"""
    _contract_plane(eq, s)
    calculus = PlaneWaveCalculus(s, xi_samples)
    values = residual_values(eq, calculus, s.params, options)
    report = summarize_residual(eq, values, lambda i: (float(calculus.xi[i]),), ResidualMode.PLANE_WAVE)
    logger.debug(f"[EQUATIONS] Plane-wave residual {eq.value} on {s.kind.value}: {report.max_abs:.3e}")
    return report


def _contract_grid(eq: EquationId, u: Field2D, u_t: Field2D, bathy: Optional[Bathymetry]):
    if u.grid != u_t.grid:
        raise ValidationError("u and u_t must share one grid")
    if eq.is_bottom and bathy is None:
        raise ContractError(f"{eq.value} requires a bathymetry")
    if not eq.is_bottom and bathy is not None:
        raise ContractError(f"{eq.value} is a flat-bottom equation; use its bottom variant")


def _grid_residual(eq: EquationId, u: Field2D, u_t: Field2D, p: PhysicalParams,
                   sample: Optional[BathymetrySample], options: EquationOptions) -> np.ndarray:
    calculus = GridCalculus(u.values, u_t.values, u.grid)
    values = residual_values(eq, calculus, p, options)
    if sample is not None and p.delta != 0.0:
        values = values + bottom_term_values(calculus.d(), calculus.d(1, 0),
                                             sample.h.values, sample.h_x.values, p.delta)
    return values


def grid_residual_field(eq: EquationId, u: Field2D, u_t: Field2D, p: PhysicalParams,
                        bathy: Optional[Bathymetry] = None,
                        options: EquationOptions = DEFAULT_OPTIONS) -> np.ndarray:
    """Pointwise residual array of the equation with u_t supplied externally"""
    _contract_grid(eq, u, u_t, bathy)
    sample = bathy.sample(u.grid) if bathy is not None else None
    return _grid_residual(eq, u, u_t, p, sample, options)


def residual_grid(eq: EquationId, u: Field2D, u_t: Field2D, bathy: Optional[Bathymetry],
                  p: PhysicalParams, options: EquationOptions = DEFAULT_OPTIONS) -> ResidualReport:
    """Spectral residual statistics on a periodic grid"""
    _contract_grid(eq, u, u_t, bathy)
    grid = u.grid
    sample = bathy.sample(grid) if bathy is not None else None
    values = _grid_residual(eq, u, u_t, p, sample, options)
    mask = None
    extra = {}
    if sample is not None:
        flags = []
        if not sample.periodic:
            rows = ~bathy.excluded_rows(grid, DEFAULT_EXCLUDED_MARGIN)
            mask = np.broadcast_to(rows[:, None], grid.shape)
            flags.append("interior-only")
            extra.update(interior_only=True, excluded_margin=DEFAULT_EXCLUDED_MARGIN)
        if sample.y_dependent:
            flags.append("y-dependent-bottom")
        extra["flags"] = flags

    def locate(index):
        i, j = np.unravel_index(index, grid.shape)
        return (float(grid.x[i]), float(grid.y[j]))

    report = summarize_residual(eq, values, locate, ResidualMode.GRID, mask, **extra)
    logger.debug(f"[EQUATIONS] Grid residual {eq.value}: max {report.max_abs:.3e} rms {report.rms:.3e}")
    return report


def spatial_operator(eq: EquationId, u: Field2D, p: PhysicalParams,
                     bathy: Optional[Bathymetry] = None,
                     options: EquationOptions = DEFAULT_OPTIONS) -> Field2D:
    """N(u) such that u_t = -N(u) for equations in evolution form"""
    if eq.is_kp_form:
        raise ContractError(f"{eq.value} is not in evolution form")
    return u.like(grid_residual_field(eq, u, Field2D.zeros(u.grid), p, bathy, options))


_ROOT_THREE_HALVES = math.sqrt(1.5)


def kp_transform(x: float, t: float, p: PhysicalParams, direction: FrameDirection) -> Tuple[float, float]:
    """x_hat = sqrt(3/2)(x - t), t_hat = sqrt(3/2) alpha t / 4, or the exact inverse"""
    time_scale = 0.25 * _ROOT_THREE_HALVES * p.alpha
    if direction is FrameDirection.TO_MOVING:
        return _ROOT_THREE_HALVES * (x - t), time_scale * t
    t_fixed = t / time_scale
    return x / _ROOT_THREE_HALVES + t_fixed, t_fixed
