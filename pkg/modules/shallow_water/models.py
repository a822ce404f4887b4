"""
Data models and validation for shallow-water wave computations
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .errors import ValidationError

logger = logging.getLogger(__name__)

SOLUTION_FORMAT_VERSION = 1
PARAMETER_CONVENTION = "m is the elliptic parameter (modulus squared)"


class CaseId(Enum):
    """Orderings of the small parameters that reduce to a single wave equation"""
    CASE5 = "case5"    # alpha ~ beta, gamma ~ beta^2, delta ~ beta
    CASE6 = "case6"    # alpha ~ gamma ~ beta^2, delta ~ beta^2
    CASE7 = "case7"    # beta ~ alpha^2, gamma ~ alpha^3, delta ~ alpha^2


class EquationId(Enum):
    """Single wave equations with a residual operator"""
    KDV_2P1 = "kdv21"
    KDV_2P1_BOTTOM = "kdv21-bottom"
    KP_FIXED_FRAME = "kp-fixed"
    KP_CLASSICAL = "kp-classical"
    KP_MOVING = "kp-moving"
    FIFTH_KDV_2P1 = "fifth-kdv21"
    FIFTH_KDV_2P1_BOTTOM = "fifth-kdv21-bottom"
    FIFTH_KP_TYPE = "fifth-kp"
    GARDNER_2P1 = "gardner21"
    GARDNER_2P1_BOTTOM = "gardner21-bottom"
    GARDNER_1P1 = "gardner11"

    @property
    def is_bottom(self) -> bool:
        return self.value.endswith("-bottom")

    @property
    def flat_counterpart(self) -> 'EquationId':
        if not self.is_bottom:
            return self
        return EquationId(self.value[:-len("-bottom")])

    @property
    def is_kp_form(self) -> bool:
        """True for equations written as an x-derivative (u_xt leads)"""
        return self in (EquationId.KP_FIXED_FRAME, EquationId.KP_CLASSICAL,
                        EquationId.KP_MOVING, EquationId.FIFTH_KP_TYPE)


class SolutionKind(Enum):
    """Closed-form traveling-wave families"""
    SOLITON = "soliton"
    CNOIDAL_MATH = "cnoidal-math"
    CNOIDAL_PHYS = "cnoidal-phys"
    SUPERPOSITION_MATH_PLUS = "superposition-math-plus"
    SUPERPOSITION_MATH_MINUS = "superposition-math-minus"
    SUPERPOSITION_PHYS_PLUS = "superposition-phys-plus"
    SUPERPOSITION_PHYS_MINUS = "superposition-phys-minus"
    KP_SOLITON = "kp-soliton"
    KP_SUPERPOSITION = "kp-superposition"

    @property
    def is_physical(self) -> bool:
        return self in (SolutionKind.CNOIDAL_PHYS, SolutionKind.SUPERPOSITION_PHYS_PLUS,
                        SolutionKind.SUPERPOSITION_PHYS_MINUS)

    @property
    def is_kp(self) -> bool:
        return self in (SolutionKind.KP_SOLITON, SolutionKind.KP_SUPERPOSITION)

    @property
    def is_superposition(self) -> bool:
        return self.value.startswith("superposition") or self is SolutionKind.KP_SUPERPOSITION

    @property
    def is_soliton(self) -> bool:
        return self in (SolutionKind.SOLITON, SolutionKind.KP_SOLITON)


class Axis(Enum):
    X = "x"
    Y = "y"


class ResidualMode(Enum):
    PLANE_WAVE = "plane-wave"
    GRID = "grid"


class FrameDirection(Enum):
    TO_MOVING = "to-moving"
    TO_FIXED = "to-fixed"


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


# Ratios that should stay O(1) for each ordering, as (label, function of params)
_REGIME_RATIOS = {
    CaseId.CASE5: [
        ("alpha/beta", lambda p: p.alpha / p.beta),
        ("gamma/beta^2", lambda p: p.gamma / p.beta ** 2),
        ("delta/beta", lambda p: p.delta / p.beta),
    ],
    CaseId.CASE6: [
        ("alpha/beta^2", lambda p: p.alpha / p.beta ** 2),
        ("gamma/beta^2", lambda p: p.gamma / p.beta ** 2),
        ("delta/beta^2", lambda p: p.delta / p.beta ** 2),
    ],
    CaseId.CASE7: [
        ("beta/alpha^2", lambda p: p.beta / p.alpha ** 2),
        ("gamma/alpha^3", lambda p: p.gamma / p.alpha ** 3),
        ("delta/alpha^2", lambda p: p.delta / p.alpha ** 2),
    ],
}


@dataclass(frozen=True)
class PhysicalParams:
    """Small parameters of the scaled Euler system.

    ``regime`` optionally tags the ordering the values are meant to satisfy;
    ``kp_lambda`` is the transverse coefficient of the classical KP equation,
    which is free in that frame.
    """
    alpha: float
    beta: float
    gamma: float = 0.0
    delta: float = 0.0
    tau: float = 0.0
    regime: Optional[CaseId] = None
    kp_lambda: Optional[float] = None

    def __post_init__(self):
        for message in self.regime_warnings():
            logger.warning(f"[PARAMS] {message}")

    def validate(self) -> List[str]:
        errors = []
        if not self.alpha > 0:
            errors.append("alpha must be > 0")
        if not self.beta > 0:
            errors.append("beta must be > 0")
        if self.gamma < 0:
            errors.append("gamma must be >= 0")
        if self.delta < 0:
            errors.append("delta must be >= 0")
        if self.tau < 0:
            errors.append("tau must be >= 0")
        return errors

    def require_valid(self):
        errors = self.validate()
        if errors:
            raise ValidationError.from_errors("physical parameters", errors)

    def regime_warnings(self) -> List[str]:
        """Ratios deviating from O(1) by more than a factor of 10"""
        if self.regime is None or self.alpha <= 0 or self.beta <= 0:
            return []
        messages = []
        for label, ratio in _REGIME_RATIOS[self.regime]:
            if label.startswith("delta") and self.delta == 0:
                continue
            value = ratio(self)
            if value == 0 or not 0.1 <= value <= 10.0:
                messages.append(f"{self.regime.value}: {label} = {value:.4g} is not O(1)")
        return messages

    @property
    def transverse_lambda(self) -> float:
        """lambda of the classical KP frame, defaulting to the moving-frame value"""
        if self.kp_lambda is not None:
            return self.kp_lambda
        return (4.0 / 3.0) * self.gamma / (self.alpha * self.beta)

    def with_changes(self, **changes) -> 'PhysicalParams':
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "delta": self.delta,
            "tau": self.tau,
            "regime": self.regime.value if self.regime else None,
            "kp_lambda": self.kp_lambda,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PhysicalParams':
        regime = data.get("regime")
        kp_lambda = data.get("kp_lambda")
        return cls(
            alpha=float(data["alpha"]),
            beta=float(data["beta"]),
            gamma=float(data.get("gamma", 0.0)),
            delta=float(data.get("delta", 0.0)),
            tau=float(data.get("tau", 0.0)),
            regime=CaseId(regime) if regime else None,
            kp_lambda=float(kp_lambda) if kp_lambda is not None else None,
        )


@dataclass(frozen=True)
class WaveParams:
    """Coefficients of a traveling wave A*G(kx + ly - omega*t; m) + B"""
    k: float
    l: float
    omega: float
    m: float
    amplitude_a: float
    offset_b: float = 0.0

    def validate(self) -> List[str]:
        errors = []
        if self.k == 0:
            errors.append("k must be nonzero")
        if not 0.0 <= self.m <= 1.0:
            errors.append("m must lie in [0, 1]")
        for name in ("k", "l", "omega", "m", "amplitude_a", "offset_b"):
            if not math.isfinite(getattr(self, name)):
                errors.append(f"{name} must be finite")
        return errors

    @property
    def wavenumber(self) -> float:
        return math.hypot(self.k, self.l)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "l": self.l,
            "omega": self.omega,
            "m": self.m,
            "amplitude_a": self.amplitude_a,
            "offset_b": self.offset_b,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'WaveParams':
        return cls(
            k=float(data["k"]),
            l=float(data["l"]),
            omega=float(data["omega"]),
            m=float(data["m"]),
            amplitude_a=float(data["amplitude_a"]),
            offset_b=float(data.get("offset_b", 0.0)),
        )


@dataclass(frozen=True)
class SolutionFamily:
    """A constructed traveling-wave solution"""
    kind: SolutionKind
    wave: WaveParams
    params: PhysicalParams

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format_version": SOLUTION_FORMAT_VERSION,
            "parameter_convention": PARAMETER_CONVENTION,
            "kind": self.kind.value,
            "wave": self.wave.to_dict(),
            "params": self.params.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SolutionFamily':
        version = data.get("format_version", SOLUTION_FORMAT_VERSION)
        if version != SOLUTION_FORMAT_VERSION:
            raise ValidationError(f"Unsupported solution format version {version}")
        try:
            return cls(
                kind=SolutionKind(data["kind"]),
                wave=WaveParams.from_dict(data["wave"]),
                params=PhysicalParams.from_dict(data["params"]),
            )
        except (KeyError, ValueError, TypeError) as e:
            raise ValidationError(f"Malformed solution document: {e}")


@dataclass(frozen=True)
class Grid2D:
    """Periodic rectangle sampled at x_i = i*Lx/nx, y_j = j*Ly/ny"""
    nx: int
    ny: int
    length_x: float
    length_y: float

    def __post_init__(self):
        errors = self.validate()
        if errors:
            raise ValidationError.from_errors("grid", errors)

    def validate(self) -> List[str]:
        errors = []
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if not isinstance(n, (int, np.integer)) or n < 8 or not _is_power_of_two(int(n)):
                errors.append(f"{name} must be a power of two >= 8, got {n}")
        for name in ("length_x", "length_y"):
            if not getattr(self, name) > 0:
                errors.append(f"{name} must be > 0")
        return errors

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def dx(self) -> float:
        return self.length_x / self.nx

    @property
    def dy(self) -> float:
        return self.length_y / self.ny

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.nx) * self.dx

    @property
    def y(self) -> np.ndarray:
        return np.arange(self.ny) * self.dy

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    def to_dict(self) -> Dict[str, Any]:
        return {"nx": self.nx, "ny": self.ny,
                "length_x": self.length_x, "length_y": self.length_y}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Grid2D':
        return cls(nx=int(data["nx"]), ny=int(data["ny"]),
                   length_x=float(data["length_x"]), length_y=float(data["length_y"]))


class Field2D:
    """Real samples on a Grid2D; row i is x_i, column j is y_j"""

    def __init__(self, grid: Grid2D, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != grid.shape:
            raise ValidationError(f"Field shape {values.shape} does not match grid {grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("Field values must be finite")
        self.grid = grid
        self.values = values

    @classmethod
    def zeros(cls, grid: Grid2D) -> 'Field2D':
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def from_function(cls, grid: Grid2D, func) -> 'Field2D':
        x, y = grid.mesh()
        return cls(grid, func(x, y))

    def like(self, values: np.ndarray) -> 'Field2D':
        return Field2D(self.grid, values)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def mass(self) -> float:
        return float(np.sum(self.values) * self.grid.dx * self.grid.dy)

    def l2(self) -> float:
        return float(np.sum(self.values ** 2) * self.grid.dx * self.grid.dy)

    def __repr__(self) -> str:
        return f"Field2D(grid={self.grid}, max_abs={self.max_abs():.3e})"


@dataclass
class ResidualReport:
    """Pointwise residual statistics of one equation"""
    equation: EquationId
    max_abs: float
    rms: float
    location_of_max: Tuple[float, ...]
    mode: ResidualMode
    samples: int = 0
    interior_only: bool = False
    excluded_margin: int = 0
    flags: List[str] = field(default_factory=list)

    def validate(self) -> List[str]:
        errors = []
        if not self.max_abs >= self.rms >= 0:
            errors.append("expected max_abs >= rms >= 0")
        return errors

    def passed(self, threshold: float) -> bool:
        return self.max_abs < threshold

    def to_dict(self) -> Dict[str, Any]:
        return {
            "equation": self.equation.value,
            "max_abs": self.max_abs,
            "rms": self.rms,
            "location_of_max": list(self.location_of_max),
            "mode": self.mode.value,
            "samples": self.samples,
            "interior_only": self.interior_only,
            "excluded_margin": self.excluded_margin,
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ResidualReport':
        return cls(
            equation=EquationId(data["equation"]),
            max_abs=float(data["max_abs"]),
            rms=float(data["rms"]),
            location_of_max=tuple(data.get("location_of_max", ())),
            mode=ResidualMode(data["mode"]),
            samples=int(data.get("samples", 0)),
            interior_only=bool(data.get("interior_only", False)),
            excluded_margin=int(data.get("excluded_margin", 0)),
            flags=list(data.get("flags", [])),
        )


EVOLVABLE_EQUATIONS = (EquationId.KDV_2P1, EquationId.KP_MOVING,
                       EquationId.KP_CLASSICAL, EquationId.FIFTH_KDV_2P1)


@dataclass(frozen=True)
class EvolutionConfig:
    """Time-stepping settings. ``backward`` integrates with -dt."""
    equation: EquationId
    dt: float
    t_end: float
    snapshot_every: int = 10
    dealias: bool = True
    include_gamma2: bool = False
    backward: bool = False

    def __post_init__(self):
        errors = self.validate()
        if errors:
            raise ValidationError.from_errors("evolution config", errors)

    def validate(self) -> List[str]:
        errors = []
        if self.equation not in EVOLVABLE_EQUATIONS:
            errors.append(f"equation {self.equation.value} cannot be evolved")
        if not self.dt > 0:
            errors.append("dt must be > 0")
        if not self.t_end >= 0:
            errors.append("t_end must be >= 0")
        if self.snapshot_every < 1:
            errors.append("snapshot_every must be >= 1")
        return errors

    @property
    def signed_dt(self) -> float:
        return -self.dt if self.backward else self.dt

    @property
    def steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def reversed(self) -> 'EvolutionConfig':
        return replace(self, backward=not self.backward)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "equation": self.equation.value,
            "dt": self.dt,
            "t_end": self.t_end,
            "snapshot_every": self.snapshot_every,
            "dealias": self.dealias,
            "include_gamma2": self.include_gamma2,
            "backward": self.backward,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'EvolutionConfig':
        try:
            return cls(
                equation=EquationId(data["equation"]),
                dt=float(data["dt"]),
                t_end=float(data["t_end"]),
                snapshot_every=int(data.get("snapshot_every", 10)),
                dealias=bool(data.get("dealias", True)),
                include_gamma2=bool(data.get("include_gamma2", False)),
                backward=bool(data.get("backward", False)),
            )
        except (KeyError, ValueError) as e:
            raise ValidationError(f"Malformed evolution config: {e}")


@dataclass(frozen=True)
class ConservedDiagnostics:
    """Mass and L2 of one snapshot; recorded, never enforced"""
    time: float
    mass: float
    l2: float

    def to_dict(self) -> Dict[str, float]:
        return {"time": self.time, "mass": self.mass, "l2": self.l2}

    @classmethod
    def from_field(cls, time: float, u: Field2D) -> 'ConservedDiagnostics':
        return cls(time=time, mass=u.mass(), l2=u.l2())
