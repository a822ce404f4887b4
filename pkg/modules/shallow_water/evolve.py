"""
Pseudo-spectral evolution of the (2+1)-D KdV and KP equations

Integrating-factor RK4: the linear part is integrated exactly in Fourier
space, the dealiased quadratic nonlinearity with classical RK4.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .equations import EQUATION_TERMS, EquationOptions
from .errors import BlowUpError, ContractError, ValidationError
from .models import (ConservedDiagnostics, EquationId, EvolutionConfig, EVOLVABLE_EQUATIONS, Field2D,
                     Grid2D, PhysicalParams)
from .operators import derivative_multiplier, forward, inverse, wavenumbers
from .storage import TrajectoryWriter

logger = logging.getLogger(__name__)

STABILITY_FACTOR = 0.5
PROJECTION_WARNING = 1e-12

# (x-derivatives, y-derivatives, x-antiderivatives) of each linear term
LINEAR_TERMS = {
    "u_x": (1, 0, 0),
    "u_3x": (3, 0, 0),
    "I[u_yy]": (0, 2, 1),
    "u_5x": (5, 0, 0),
    "u_x2y": (1, 2, 0),
    "I3[u_4y]": (0, 4, 3),
    "u_2x": (2, 0, 0),
    "u_4x": (4, 0, 0),
    "u_yy": (0, 2, 0),
    "u_6x": (6, 0, 0),
    "u_2x2y": (2, 2, 0),
    "I2[u_4y]": (0, 4, 2),
}
NONLINEAR_TERMS = ("u*u_x", "(u*u_x)_x")
TIME_TERMS = ("u_t", "u_xt")


def _require_evolvable(eq: EquationId):
    if eq not in EVOLVABLE_EQUATIONS:
        raise ContractError(f"{eq.value} cannot be evolved; choose one of "
                            f"{', '.join(e.value for e in EVOLVABLE_EQUATIONS)}")


def linear_symbol(eq: EquationId, kx, ky, p: PhysicalParams, include_gamma2: bool = False):
    """Fourier symbol Omega of the linear operator L in u_t + L u + N(u) = 0.

    KP forms are divided by d_x first. The antiderivative symbol is 1/(i kx)
    and every kx = 0 mode gets Omega = 0.
    """
    _require_evolvable(eq)
    kx = np.asarray(kx, dtype=np.float64)
    ky = np.asarray(ky, dtype=np.float64)
    zero = kx == 0
    inv = np.where(zero, 0.0, 1.0 / (1j * np.where(zero, 1.0, kx)))
    extra_division = 1 if eq.is_kp_form else 0
    options = EquationOptions(include_gamma2=include_gamma2)
    omega = np.zeros(np.broadcast(kx, ky).shape, dtype=np.complex128)
    for label, coefficient in EQUATION_TERMS[eq]:
        if label not in LINEAR_TERMS:
            continue
        value = coefficient(p, options)
        if value == 0.0:
            continue
        nx, ny, ni = LINEAR_TERMS[label]
        omega = omega + value * (1j * kx) ** nx * (1j * ky) ** ny * inv ** (ni + extra_division)
    omega = np.where(zero, 0.0, omega)
    return omega[()] if omega.ndim == 0 else omega


def nonlinear_coefficient(eq: EquationId, p: PhysicalParams) -> float:
    """c in N(u) = c u u_x"""
    for label, coefficient in EQUATION_TERMS[eq]:
        if label in NONLINEAR_TERMS:
            return float(coefficient(p, EquationOptions()))
    return 0.0


def project_initial_condition(u0: Field2D) -> tuple:
    """Remove the y-varying part of the row means (kx = 0, ky != 0 modes).

    Returns the projected field and the max-abs size of what was removed.
    """
    spectrum = forward(u0.values)
    spectrum[0, 1:] = 0.0
    projected = inverse(spectrum, u0.grid)
    magnitude = float(np.max(np.abs(projected - u0.values)))
    if magnitude > PROJECTION_WARNING:
        logger.warning(f"[EVOLVE] Initial condition projected to uniform row means; "
                       f"removed max |delta u| = {magnitude:.3e}")
    return u0.like(projected), magnitude


class IntegratingFactorRK4:
    """Fixed-step IF-RK4 stepper for one equation on one grid"""

    def __init__(self, cfg: EvolutionConfig, grid: Grid2D, p: PhysicalParams, dt: Optional[float] = None):
        _require_evolvable(cfg.equation)
        self.cfg = cfg
        self.grid = grid
        self.p = p
        self.dt = cfg.signed_dt if dt is None else dt
        tables = wavenumbers(grid)
        omega = linear_symbol(cfg.equation, tables.kx, tables.ky, p, cfg.include_gamma2)
        # Nyquist modes of a real field cannot rotate
        omega = np.where(tables.nyquist_x | tables.nyquist_y, 0.0, omega)
        self.omega = omega
        self.mask = tables.dealias_mask if cfg.dealias else np.ones(omega.shape, dtype=bool)
        self.max_rate = float(np.max(np.abs(np.where(self.mask, omega, 0.0))))
        limit = STABILITY_FACTOR / self.max_rate if self.max_rate > 0 else math.inf
        if abs(self.dt) > limit:
            raise ValidationError(f"dt={abs(self.dt):.6g} exceeds the linear stability limit "
                                  f"{limit:.6g} = {STABILITY_FACTOR}/max|Omega| for {cfg.equation.value}",
                                  {"dt": abs(self.dt), "limit": limit})
        self.full = np.exp(-omega * self.dt)
        self.half = np.exp(-omega * self.dt / 2.0)
        self.nonlinear = -0.5 * nonlinear_coefficient(cfg.equation, p) * derivative_multiplier(grid, 1, 0)
        logger.debug(f"[EVOLVE] Stepper {cfg.equation.value} on {grid}: dt={self.dt:.6g}, "
                     f"max|Omega|={self.max_rate:.6g}")

    def _rhs(self, spectrum: np.ndarray) -> np.ndarray:
        """-N(u) in Fourier space; u u_x = (u^2)_x / 2"""
        if self.cfg.dealias:
            spectrum = spectrum * self.mask
        u = inverse(spectrum, self.grid)
        product = forward(u * u)
        if self.cfg.dealias:
            product = product * self.mask
        return self.nonlinear * product

    def advance(self, spectrum: np.ndarray) -> np.ndarray:
        dt, full, half = self.dt, self.full, self.half
        a = self._rhs(spectrum)
        b = self._rhs(half * (spectrum + 0.5 * dt * a))
        c = self._rhs(half * spectrum + 0.5 * dt * b)
        d = self._rhs(full * spectrum + dt * half * c)
        return full * spectrum + (dt / 6.0) * (full * a + 2.0 * half * (b + c) + d)

    def step(self, state: Field2D) -> Field2D:
        return state.like(inverse(self.advance(forward(state.values)), self.grid))


def step(state: Field2D, cfg: EvolutionConfig, p: PhysicalParams) -> Field2D:
    """Advance one dt"""
    return IntegratingFactorRK4(cfg, state.grid, p).step(state)


@dataclass
class Trajectory:
    config: EvolutionConfig
    times: List[float]
    snapshots: List[Field2D]
    diagnostics: List[ConservedDiagnostics]
    projection: float = 0.0
    wall_time: float = 0.0
    directory: Optional[str] = None
    files: List[str] = field(default_factory=list)

    @property
    def final(self) -> Field2D:
        return self.snapshots[-1]

    def mass_drift(self) -> float:
        """Max relative deviation of the mass from its initial value"""
        masses = np.array([d.mass for d in self.diagnostics])
        scale = max(abs(masses[0]), float(np.max(np.abs(masses))), 1e-300)
        return float(np.max(np.abs(masses - masses[0])) / scale)

    def l2_drift(self) -> float:
        values = np.array([d.l2 for d in self.diagnostics])
        return float(np.max(np.abs(values - values[0])) / max(values[0], 1e-300))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config": self.config.to_dict(),
            "times": list(self.times),
            "diagnostics": [d.to_dict() for d in self.diagnostics],
            "projection": self.projection,
            "mass_drift": self.mass_drift(),
            "l2_drift": self.l2_drift(),
            "wall_time": self.wall_time,
        }


def _step_plan(cfg: EvolutionConfig) -> tuple:
    """Number of steps and the (possibly shortened) dt that lands exactly on t_end"""
    if cfg.t_end == 0:
        return 0, cfg.dt
    steps = max(1, math.ceil(cfg.t_end / cfg.dt - 1e-9))
    dt = cfg.t_end / steps
    if abs(dt - cfg.dt) > 1e-12 * cfg.dt:
        logger.debug(f"[EVOLVE] dt shortened from {cfg.dt:.6g} to {dt:.6g} to land on t_end")
    return steps, dt


def run(u0: Field2D, cfg: EvolutionConfig, p: PhysicalParams, out_dir: Optional[str] = None,
        parameters: Optional[Dict[str, Any]] = None) -> Trajectory:
    """Evolve u0 to t_end, keeping every ``snapshot_every``-th state and the final one.

    With ``out_dir`` the snapshots go to numbered Field2D binaries next to a
    diagnostics CSV and the run manifest.
    """
    from manifest_utils import create_manifest, finalize_manifest, write_manifest

    started = time.perf_counter()
    direction = -1.0 if cfg.backward else 1.0
    steps, dt = _step_plan(cfg)
    state, projection = project_initial_condition(u0)

    writer = None
    manifest = None
    if out_dir is not None:
        manifest = create_manifest("evolve", {**(parameters or {}), "config": cfg.to_dict(),
                                              "params": p.to_dict(), "grid": u0.grid.to_dict()})
        write_manifest(out_dir, manifest)
        writer = TrajectoryWriter(out_dir)

    trajectory = Trajectory(config=cfg, times=[], snapshots=[], diagnostics=[], projection=projection,
                            directory=out_dir)

    def record(t: float, u: Field2D):
        trajectory.times.append(t)
        trajectory.snapshots.append(u)
        trajectory.diagnostics.append(ConservedDiagnostics.from_field(t, u))
        if writer is not None:
            trajectory.files.append(writer.add_snapshot(t, u))

    record(0.0, state)
    if steps:
        stepper = IntegratingFactorRK4(cfg, u0.grid, p, dt=direction * dt)
        spectrum = forward(state.values)
        for n in range(1, steps + 1):
            spectrum = stepper.advance(spectrum)
            t = direction * n * dt
            if not np.all(np.isfinite(spectrum)):
                raise BlowUpError(f"Evolution of {cfg.equation.value} blew up at t={t:.6g}", time=t)
            if n % cfg.snapshot_every == 0 or n == steps:
                record(t, state.like(inverse(spectrum, u0.grid)))

    trajectory.wall_time = time.perf_counter() - started
    if writer is not None:
        diagnostics_file = writer.write_diagnostics_csv()
        finalize_manifest(out_dir, manifest,
                          outputs={"snapshots": list(trajectory.files), "diagnostics": diagnostics_file},
                          wall_time=trajectory.wall_time, diagnostics=trajectory.to_dict())
    logger.info(f"[EVOLVE] {cfg.equation.value}: {steps} steps to t={direction * steps * dt:.6g} "
                f"in {trajectory.wall_time:.2f}s, mass drift {trajectory.mass_drift():.2e}")
    return trajectory


@dataclass
class ConvergenceReport:
    dts: List[float]
    errors: List[float]

    @property
    def order(self) -> float:
        return math.log2(self.errors[0] / self.errors[1])

    def to_dict(self) -> Dict[str, Any]:
        return {"dts": list(self.dts), "errors": list(self.errors), "order": self.order}


def convergence_study(u0: Field2D, cfg: EvolutionConfig, p: PhysicalParams) -> ConvergenceReport:
    """Errors of dt and dt/2 runs against a dt/8 reference at t_end"""
    if cfg.t_end <= 0:
        raise ValidationError("Convergence study needs t_end > 0")

    def final(dt: float) -> np.ndarray:
        config = EvolutionConfig(equation=cfg.equation, dt=dt, t_end=cfg.t_end, snapshot_every=10 ** 9,
                                 dealias=cfg.dealias, include_gamma2=cfg.include_gamma2, backward=cfg.backward)
        return run(u0, config, p).final.values

    reference = final(cfg.dt / 8.0)
    dts = [cfg.dt, cfg.dt / 2.0]
    errors = [float(np.max(np.abs(final(dt) - reference))) for dt in dts]
    report = ConvergenceReport(dts=dts, errors=errors)
    logger.info(f"[EVOLVE] Observed temporal order {report.order:.3f} ({errors[0]:.3e} -> {errors[1]:.3e})")
    return report
