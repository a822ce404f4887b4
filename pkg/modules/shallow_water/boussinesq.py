"""
Boussinesq pairs, the auxiliary field w and compatibility order checks

For every ordering case the surface elevation u and the auxiliary field w
obey two coupled first-order-in-time equations. Substituting
w = u + corrections makes both reduce to one wave equation; here that
claim is measured as the convergence order of max|r1 - r2| in an
epsilon-sweep.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .bathymetry import Bathymetry
from .equations import summarize_residual, EquationOptions, spatial_operator
from .errors import OrderError, ValidationError
from .models import (CaseId, EquationId, Field2D, Grid2D, PhysicalParams, ResidualMode,
                     ResidualReport, SolutionFamily)
from .operators import antiderivative_values, derivative_values, GridCalculus
from .solutions import commensurate_grid, grid_solution, period_xi
from .sweeps import run_parallel

logger = logging.getLogger(__name__)

DEFAULT_EPSILONS = (0.1, 0.05, 0.025, 0.0125)
DEFAULT_FD_STEP = 1e-2
DEFAULT_PROFILE_GRID = (128, 64)
# sech^2 falls below 1e-8 of its crest inside this xi window
SOLITON_PROFILE_WINDOW = 20.0
FINAL_EQUATIONS = {
    CaseId.CASE5: EquationId.KDV_2P1,
    CaseId.CASE6: EquationId.FIFTH_KDV_2P1,
    CaseId.CASE7: EquationId.GARDNER_2P1,
}
DEFAULT_ORDERS = {CaseId.CASE5: 1, CaseId.CASE6: 2, CaseId.CASE7: 2}
LAPLACE_EXPECTED_ORDER = {CaseId.CASE5: 3, CaseId.CASE6: 4, CaseId.CASE7: 5}


def _d(values: np.ndarray, grid: Grid2D, nx: int = 0, ny: int = 0) -> np.ndarray:
    return derivative_values(values, grid, nx, ny)


def _j(values: np.ndarray, grid: Grid2D, times: int = 1, what: str = "integrand") -> np.ndarray:
    return antiderivative_values(values, grid, times, what=what)


@dataclass
class Correction:
    """One labelled correction: w gains coefficient * values"""
    label: str
    order: int
    coefficient: float
    values: np.ndarray

    @property
    def contribution(self) -> np.ndarray:
        return self.coefficient * self.values


def _bottom_correction(c: GridCalculus, bathy: Bathymetry) -> np.ndarray:
    sample = bathy.sample(c.grid)
    return 0.25 * (2.0 * sample.h.values * c.d() + sample.h_x.values * c.ix_d(0, 0, 1))


def correction_terms(case: CaseId, u: Field2D, p: PhysicalParams, bathy: Optional[Bathymetry] = None,
                     order: Optional[int] = None, trial_qga: float = 0.0,
                     printed_quartic: bool = False) -> List[Correction]:
    """Corrections of w up to the requested order, each with its label"""
    order = DEFAULT_ORDERS[case] if order is None else order
    if order not in (1, 2):
        raise OrderError(f"Correction order must be 1 or 2, got {order}")
    if case is CaseId.CASE5 and order != 1:
        raise OrderError("Case5 corrections stop at first order")

    c = GridCalculus(u.values, None, u.grid)
    alpha, beta, gamma, delta, tau = p.alpha, p.beta, p.gamma, p.delta, p.tau
    g = gamma / beta
    terms: List[Correction] = []

    def add(label, term_order, coefficient, builder):
        if term_order <= order:
            terms.append(Correction(label, term_order, coefficient, builder()))

    transverse = lambda: -0.5 * c.ix_d(0, 2, 2)
    if case is CaseId.CASE5:
        add("Qa", 1, alpha, lambda: -0.25 * c.d() ** 2)
        add("Qb", 1, beta, lambda: c.d(2, 0) / 3.0)
        add("Qg", 1, g, transverse)
        if trial_qga:
            add("Qga", 1, trial_qga * gamma / alpha, lambda: c.ix_d(0, 2, 2))
        if bathy is not None:
            add("Qd", 1, delta, lambda: _bottom_correction(c, bathy))
    elif case is CaseId.CASE6:
        add("Qb", 1, beta * (2.0 - 3.0 * tau) / 6.0, lambda: c.d(2, 0))
        add("Qg", 1, g, transverse)
        add("Qa", 2, alpha, lambda: -0.25 * c.d() ** 2)
        add("Qbb", 2, beta ** 2 * (12.0 - 20.0 * tau - 15.0 * tau ** 2) / 120.0, lambda: c.d(4, 0))
        add("Qgb", 2, gamma * (2.0 - 3.0 * tau) / 12.0, lambda: c.d(0, 2))
        add("Qgb2", 2, g * g, lambda: 0.375 * c.ix_d(0, 4, 4))
        if bathy is not None:
            add("Qd", 2, delta, lambda: _bottom_correction(c, bathy))
    else:
        add("Qa", 1, alpha, lambda: -0.25 * c.d() ** 2)
        add("Qg", 1, g, transverse)
        add("Qb", 2, beta * (2.0 - 3.0 * tau) / 6.0, lambda: c.d(2, 0))
        add("Qaa", 2, alpha ** 2, lambda: 0.125 * c.d() ** 3)

        def mixed():
            u_val = c.d()
            values = (0.625 * c.ix(c.d(0, 1) ** 2 + u_val * c.d(0, 2), 2)
                      - 0.375 * c.ix(u_val * c.ix_d(0, 2, 1), 1))
            if printed_quartic:
                values = values - 1.5 * c.ix(u_val * c.ix(u_val ** 2 * c.d(0, 2), 1), 1)
            return values

        add("Qagb", 2, alpha * g, mixed)
        add("Qba2", 2, beta / alpha ** 2, lambda: np.zeros_like(c.d()))
        add("Qgb2", 2, g * g, lambda: 0.375 * c.ix_d(0, 4, 4))
        if bathy is not None:
            add("Qd", 2, delta, lambda: _bottom_correction(c, bathy))
    return terms


def build_w(case: CaseId, u: Field2D, p: PhysicalParams, bathy: Optional[Bathymetry] = None,
            order: Optional[int] = None, disabled: Iterable[str] = (), trial_qga: float = 0.0,
            printed_quartic: bool = False) -> Field2D:
    """w = u + the case's corrections up to ``order``; labels in ``disabled`` are skipped"""
    disabled = set(disabled)
    values = np.array(u.values, dtype=np.float64)
    for correction in correction_terms(case, u, p, bathy, order, trial_qga, printed_quartic):
        if correction.label not in disabled:
            values = values + correction.contribution
    return u.like(values)


def pair_residual_fields(case: CaseId, u: Field2D, u_t: Field2D, w: Field2D, w_t: Field2D,
                         p: PhysicalParams, bathy: Optional[Bathymetry] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Pointwise residuals (r1, r2) of the case's Boussinesq pair"""
    grid = u.grid
    if any(f.grid != grid for f in (u_t, w, w_t)):
        raise ValidationError("Boussinesq fields must share one grid")
    if bathy is not None and p.delta == 0.0:
        logger.debug("[BOUSSINESQ] Bathymetry supplied with delta = 0; bottom terms vanish")
    alpha, beta, gamma, delta, tau = p.alpha, p.beta, p.gamma, p.delta, p.tau
    g = gamma / beta
    uu, ut, ww, wt = u.values, u_t.values, w.values, w_t.values

    def dw(nx=0, ny=0):
        return _d(ww, grid, nx, ny)

    def dwt(nx=0, ny=0):
        return _d(wt, grid, nx, ny)

    def du(nx=0, ny=0):
        return _d(uu, grid, nx, ny)

    w_x = dw(1, 0)
    r1 = ut + w_x + alpha * _d(uu * ww, grid, 1, 0)
    r2 = wt + du(1, 0) + alpha * ww * w_x

    if case is CaseId.CASE5:
        r1 = r1 - (beta / 6.0) * dw(3, 0) + g * _j(dw(0, 2), grid)
        r2 = r2 - 0.5 * beta * dwt(2, 0)
    elif case is CaseId.CASE6:
        r1 = (r1 - (beta / 6.0) * dw(3, 0) + g * _j(dw(0, 2), grid)
              + (beta ** 2 / 120.0) * dw(5, 0) - (gamma / 3.0) * dw(1, 2))
        r2 = (r2 - beta * (0.5 * dwt(2, 0) + tau * du(3, 0))
              + (beta ** 2 / 24.0) * dwt(4, 0)
              - gamma * (0.5 * dwt(0, 2) + tau * du(1, 2)))
    else:
        j_wy = _j(dw(0, 1), grid)
        r1 = (r1 + g * _j(dw(0, 2), grid) - (beta / 6.0) * dw(3, 0)
              + alpha * g * (du(0, 1) * j_wy + uu * _j(dw(0, 2), grid)))
        r2 = r2 + alpha * g * dw(0, 1) * j_wy - 0.5 * beta * (dwt(2, 0) + 2.0 * tau * du(3, 0))

    if bathy is not None and delta != 0.0:
        sample = bathy.sample(grid)
        r1 = r1 - delta * (sample.h_x.values * ww + sample.h.values * w_x)
    return r1, r2


def boussinesq_residual_pair(case: CaseId, u: Field2D, u_t: Field2D, w: Field2D, w_t: Field2D,
                             p: PhysicalParams,
                             bathy: Optional[Bathymetry] = None) -> Tuple[ResidualReport, ResidualReport]:
    """Reports for both equations of the pair; flags carry 'r1'/'r2' and the case"""
    r1, r2 = pair_residual_fields(case, u, u_t, w, w_t, p, bathy)
    grid = u.grid

    def locate(index):
        i, j = np.unravel_index(index, grid.shape)
        return float(grid.x[i]), float(grid.y[j])

    equation = FINAL_EQUATIONS[case]
    return tuple(summarize_residual(equation, values, locate, ResidualMode.GRID, flags=[label, case.value])
                 for label, values in (("r1", r1), ("r2", r2)))


def case_params(case: CaseId, epsilon: float, tau: float = 0.0, with_bottom: bool = False) -> PhysicalParams:
    """Parameters following the case ordering at one epsilon"""
    if case is CaseId.CASE5:
        alpha, beta, gamma, delta = epsilon, epsilon, epsilon ** 2, epsilon
    elif case is CaseId.CASE6:
        alpha, beta, gamma, delta = epsilon ** 2, epsilon, epsilon ** 2, epsilon ** 2
    else:
        alpha, beta, gamma, delta = epsilon, epsilon ** 2, epsilon ** 3, epsilon ** 2
    return PhysicalParams(alpha=alpha, beta=beta, gamma=gamma, delta=delta if with_bottom else 0.0,
                          tau=tau, regime=case)


def directional_w_t(case: CaseId, u: Field2D, u_t: Field2D, p: PhysicalParams,
                    bathy: Optional[Bathymetry] = None, step: float = DEFAULT_FD_STEP,
                    **w_options) -> Field2D:
    """w_t as the derivative of build_w along u_t (five-point stencil).

    w is a polynomial of degree at most four in u, so the stencil is exact up
    to rounding for any step.
    """
    def w_at(shift):
        return build_w(case, u.like(u.values + shift * u_t.values), p, bathy, **w_options).values

    values = (-w_at(2 * step) + 8.0 * w_at(step) - 8.0 * w_at(-step) + w_at(-2 * step)) / (12.0 * step)
    return u.like(values)


@dataclass
class CompatibilityRow:
    epsilon: float
    max_difference: float
    max_r1: float
    max_r2: float

    def to_dict(self) -> Dict[str, float]:
        return {"epsilon": self.epsilon, "max_difference": self.max_difference,
                "max_r1": self.max_r1, "max_r2": self.max_r2}


def fit_slope(epsilons: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(values) against log(epsilons)"""
    values = np.maximum(np.asarray(values, dtype=np.float64), np.finfo(float).tiny)
    return float(np.polyfit(np.log(epsilons), np.log(values), 1)[0])


@dataclass
class CompatibilityReport:
    case: CaseId
    order: int
    rows: List[CompatibilityRow]
    profile: str
    disabled: List[str] = field(default_factory=list)

    @property
    def epsilons(self) -> List[float]:
        return [row.epsilon for row in self.rows]

    @property
    def slope(self) -> float:
        return fit_slope(self.epsilons, [row.max_difference for row in self.rows])

    @property
    def slope_r1(self) -> float:
        return fit_slope(self.epsilons, [row.max_r1 for row in self.rows])

    @property
    def slope_r2(self) -> float:
        return fit_slope(self.epsilons, [row.max_r2 for row in self.rows])

    @property
    def threshold(self) -> float:
        return self.order + 1 - (0.1 if self.order == 1 else 0.15)

    def passed(self) -> bool:
        return self.slope >= self.threshold

    def table(self) -> np.ndarray:
        return np.array([[r.epsilon, r.max_difference, r.max_r1, r.max_r2] for r in self.rows])

    def to_dict(self) -> Dict[str, Any]:
        return {"case": self.case.value, "order": self.order, "profile": self.profile,
                "disabled": list(self.disabled), "slope": self.slope,
                "slope_r1": self.slope_r1, "slope_r2": self.slope_r2,
                "threshold": self.threshold, "rows": [r.to_dict() for r in self.rows]}


def profile_grid(s: SolutionFamily, nx: int = DEFAULT_PROFILE_GRID[0], ny: int = DEFAULT_PROFILE_GRID[1]) -> Grid2D:
    """Commensurate box for a sweep profile; solitons use the narrower xi window"""
    if s.wave.l != 0 and period_xi(s) is None:
        logger.warning(f"[BOUSSINESQ] Oblique soliton profile samples xi every "
                       f"{SOLITON_PROFILE_WINDOW / ny:.3g} along y; products may alias")
    return commensurate_grid(s, nx, ny, window=SOLITON_PROFILE_WINDOW)


def _profile_field(profile: Union[SolutionFamily, Field2D], grid: Optional[Grid2D]) -> Tuple[Field2D, str]:
    if isinstance(profile, Field2D):
        return profile, "field"
    grid = grid or profile_grid(profile)
    u, _ = grid_solution(profile, grid, window=SOLITON_PROFILE_WINDOW)
    return u, profile.kind.value


def _validate_epsilons(epsilons: Sequence[float]):
    if len(epsilons) < 4:
        raise ValidationError("Compatibility sweeps need at least 4 epsilon values")
    if any(e <= 0 for e in epsilons) or any(b >= a for a, b in zip(epsilons, epsilons[1:])):
        raise ValidationError("Epsilon values must be positive and strictly decreasing")


def compatibility_order_test(case: CaseId, u_profile: Union[SolutionFamily, Field2D],
                             epsilons: Sequence[float] = DEFAULT_EPSILONS, order: Optional[int] = None,
                             grid: Optional[Grid2D] = None, bathy: Optional[Bathymetry] = None,
                             disabled: Iterable[str] = (), trial_qga: float = 0.0,
                             printed_quartic: bool = False, tau: float = 0.0,
                             workers: Optional[int] = None,
                             fd_step: float = DEFAULT_FD_STEP) -> CompatibilityReport:
    """Fit the log-log slope of max|r1 - r2| over an epsilon-sweep"""
    _validate_epsilons(epsilons)
    order = DEFAULT_ORDERS[case] if order is None else order
    u, label = _profile_field(u_profile, grid)
    disabled = list(disabled)
    equation = FINAL_EQUATIONS[case]
    if bathy is not None:
        equation = EquationId(equation.value + "-bottom")
    options = EquationOptions(include_gamma2=True, printed_quartic=printed_quartic)
    w_options = dict(order=order, disabled=disabled, trial_qga=trial_qga, printed_quartic=printed_quartic)

    def evaluate(epsilon: float) -> CompatibilityRow:
        p = case_params(case, epsilon, tau, with_bottom=bathy is not None)
        u_t = u.like(-spatial_operator(equation, u, p, bathy, options).values)
        w = build_w(case, u, p, bathy, **w_options)
        w_t = directional_w_t(case, u, u_t, p, bathy, fd_step, **w_options)
        r1, r2 = pair_residual_fields(case, u, u_t, w, w_t, p, bathy)
        return CompatibilityRow(epsilon, float(np.max(np.abs(r1 - r2))),
                                float(np.max(np.abs(r1))), float(np.max(np.abs(r2))))

    rows = run_parallel(evaluate, list(epsilons), workers=workers, label=f"compat {case.value}")
    report = CompatibilityReport(case=case, order=order, rows=rows, profile=label, disabled=disabled)
    logger.info(f"[BOUSSINESQ] {case.value} order {order} ({label}): slope {report.slope:.3f}")
    return report


def random_plane_field(grid: Grid2D, rng: np.random.Generator, cycles_x: int = 1, cycles_y: int = 1,
                       modes: int = 3, amplitude: float = 0.5, odd: bool = False) -> Field2D:
    """Smooth zero-mean field a(theta), theta = 2 pi (cycles_x x/Lx + cycles_y y/Ly).

    Every nested x-antiderivative of such a field exists, since all its
    integrands are theta-derivatives. ``odd`` keeps only sine harmonics.
    """
    x, y = grid.mesh()
    theta = 2.0 * np.pi * (cycles_x * x / grid.length_x + cycles_y * y / grid.length_y)
    values = np.zeros(grid.shape)
    for n in range(1, modes + 1):
        weight = math.exp(-0.5 * (n - 1))
        values += weight * rng.standard_normal() * np.sin(n * theta)
        if not odd:
            values += weight * rng.standard_normal() * np.cos(n * theta)
    scale = np.max(np.abs(values))
    return Field2D(grid, amplitude * values / scale if scale > 0 else values)


def potential_series(case: CaseId, f: Field2D, p: PhysicalParams,
                     bathy: Optional[Bathymetry] = None) -> Dict[int, np.ndarray]:
    """phi as {power of z: coefficient field}, truncated as each case prescribes"""
    grid = f.grid
    beta, gamma, delta = p.beta, p.gamma, p.delta
    fv = f.values
    series = {
        0: np.array(fv),
        2: -0.5 * (beta * _d(fv, grid, 2, 0) + gamma * _d(fv, grid, 0, 2)),
    }
    if case is CaseId.CASE6:
        series[4] = (beta ** 2 * _d(fv, grid, 4, 0) + 2.0 * beta * gamma * _d(fv, grid, 2, 2)) / 24.0
        series[6] = -(beta ** 3 / 720.0) * _d(fv, grid, 6, 0)
    else:
        series[4] = (beta ** 2 / 24.0) * _d(fv, grid, 4, 0)
    if bathy is not None and delta != 0.0:
        sample = bathy.sample(grid)
        series[1] = beta * delta * (sample.h_x.values * _d(fv, grid, 1, 0)
                                    + sample.h.values * _d(fv, grid, 2, 0))
    return series


def evaluate_series(series: Dict[int, np.ndarray], z: float) -> np.ndarray:
    return sum(z ** power * values for power, values in series.items())


def velocity_potential(case: CaseId, f: Field2D, bathy: Optional[Bathymetry], z: float,
                       p: PhysicalParams) -> Field2D:
    """phi(x, y, z) from the bottom potential f, truncated at the case's order"""
    if not 0.0 <= z <= 1.0 + max(p.alpha, 0.0):
        raise ValidationError(f"z={z} outside [0, 1 + alpha]")
    return f.like(evaluate_series(potential_series(case, f, p, bathy), z))


def flat_potential_series(f: Field2D, z: float, p: PhysicalParams, terms: int = 4) -> Field2D:
    """sum_n (-1)^n z^(2n)/(2n)! (beta d_xx + gamma d_yy)^n f, the untruncated flat-bottom series"""
    grid = f.grid
    power = np.array(f.values)
    total = np.array(f.values)
    for n in range(1, terms):
        power = p.beta * _d(power, grid, 2, 0) + p.gamma * _d(power, grid, 0, 2)
        total = total + (-1) ** n * z ** (2 * n) / math.factorial(2 * n) * power
    return f.like(total)


def bottom_f_correction(case: CaseId, f: Field2D, bathy: Bathymetry, p: PhysicalParams) -> Field2D:
    """Linear-in-z coefficient F fixed by the bottom boundary condition"""
    grid = f.grid
    sample = bathy.sample(grid)
    h, h_x = sample.h.values, sample.h_x.values
    fv = f.values
    along_x = h_x * _d(fv, grid, 1, 0) + h * _d(fv, grid, 2, 0)
    if case is CaseId.CASE5:
        # valid to second order; the beta^3 terms D*G*(h f_y)_y and D^2 (h^2 F_x)_x / 2 are dropped
        return f.like(p.beta * p.delta * along_x)
    y_slope = bathy.y_slope(*grid.mesh())
    along_y = y_slope * _d(fv, grid, 0, 1) + h * _d(fv, grid, 0, 2)
    return f.like(p.beta * p.delta * along_x + p.gamma * p.delta * along_y)


def laplace_residual(case: CaseId, f: Field2D, p: PhysicalParams, z: float = 1.0) -> Field2D:
    """beta phi_xx + gamma phi_yy + phi_zz of the flat-bottom truncated series at height z"""
    grid = f.grid
    series = potential_series(case, f, p)
    total = np.zeros(grid.shape)
    for power, values in series.items():
        total += z ** power * (p.beta * _d(values, grid, 2, 0) + p.gamma * _d(values, grid, 0, 2))
        if power >= 2:
            total += power * (power - 1) * z ** (power - 2) * values
    return f.like(total)


def laplace_order_test(case: CaseId, f: Field2D, epsilons: Sequence[float] = DEFAULT_EPSILONS,
                       z: float = 1.0, workers: Optional[int] = None) -> float:
    """Slope of max|Laplace residual| over an epsilon-sweep of the case ordering"""
    _validate_epsilons(epsilons)

    def evaluate(epsilon: float) -> float:
        return laplace_residual(case, f, case_params(case, epsilon), z).max_abs()

    values = run_parallel(evaluate, list(epsilons), workers=workers, label=f"laplace {case.value}")
    return fit_slope(epsilons, values)
