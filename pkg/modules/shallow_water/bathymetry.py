"""
Piecewise-linear bottom profiles and the universal bottom forcing term
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from .errors import BathymetryError, DiscontinuityError, NonLinearSegmentError
from .models import Field2D, Grid2D
from .operators import derivative_values

logger = logging.getLogger(__name__)

CONTINUITY_TOLERANCE = 1e-12
DEFAULT_EXCLUDED_MARGIN = 4


@dataclass(frozen=True)
class Segment:
    """h = slope*x + intercept + y_slope*y for x >= x_break (until the next break)"""
    x_break: float
    slope: float
    intercept: float
    y_slope: float = 0.0

    def height(self, x, y=0.0):
        return self.slope * x + self.intercept + self.y_slope * y

    def to_dict(self) -> Dict[str, float]:
        return {"x_break": self.x_break, "slope": self.slope,
                "intercept": self.intercept, "y_slope": self.y_slope}


SegmentSpec = Union[Segment, Dict[str, Any], Sequence[float]]


def _coerce_segment(spec: SegmentSpec) -> Segment:
    if isinstance(spec, Segment):
        return spec
    if isinstance(spec, dict):
        quadratic = float(spec.get("quadratic", 0.0))
        values = (spec["x_break"], spec["slope"], spec["intercept"])
        y_slope = float(spec.get("y_slope", 0.0))
    else:
        spec = list(spec)
        if len(spec) not in (3, 4):
            raise BathymetryError(f"Segment needs (x_break, slope, intercept[, quadratic]), got {spec}")
        values = spec[:3]
        quadratic = float(spec[3]) if len(spec) == 4 else 0.0
        y_slope = 0.0
    if quadratic != 0.0:
        raise NonLinearSegmentError(
            f"Segment at x={values[0]} has quadratic coefficient {quadratic}; h_xx must vanish",
            {"x_break": float(values[0]), "quadratic": quadratic})
    return Segment(float(values[0]), float(values[1]), float(values[2]), y_slope)


@dataclass(frozen=True)
class BathymetrySample:
    """Bottom sampled on a grid, with its certification flags"""
    h: Field2D
    h_x: Field2D
    wrap_jump: float
    y_dependent: bool

    @property
    def periodic(self) -> bool:
        return self.wrap_jump <= CONTINUITY_TOLERANCE


class Bathymetry:
    """Bottom h(x, y), linear in x on every segment; the first segment extends to -inf"""

    def __init__(self, segments: List[Segment]):
        self.segments = tuple(segments)
        self.breaks = np.array([s.x_break for s in self.segments])

    def _segment_index(self, x: np.ndarray) -> np.ndarray:
        return np.clip(np.searchsorted(self.breaks, x, side="right") - 1, 0, len(self.segments) - 1)

    def _coefficients(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        index = self._segment_index(np.asarray(x, dtype=np.float64))
        slopes = np.array([s.slope for s in self.segments])[index]
        intercepts = np.array([s.intercept for s in self.segments])[index]
        y_slopes = np.array([s.y_slope for s in self.segments])[index]
        return slopes, intercepts, y_slopes

    def height(self, x, y=0.0) -> np.ndarray:
        slopes, intercepts, y_slopes = self._coefficients(x)
        return slopes * np.asarray(x) + intercepts + y_slopes * np.asarray(y)

    def slope(self, x, y=0.0) -> np.ndarray:
        """Analytic h_x; at a break the right-hand segment applies"""
        slopes, _, _ = self._coefficients(x)
        return slopes + 0.0 * np.asarray(y)

    def y_slope(self, x, y=0.0) -> np.ndarray:
        _, _, y_slopes = self._coefficients(x)
        return y_slopes + 0.0 * np.asarray(y)

    @property
    def y_dependent(self) -> bool:
        return any(s.y_slope != 0.0 for s in self.segments)

    @property
    def is_flat(self) -> bool:
        return all(s.slope == 0.0 and s.intercept == 0.0 and s.y_slope == 0.0 for s in self.segments)

    def sample(self, grid: Grid2D) -> BathymetrySample:
        x, y = grid.mesh()
        h = self.height(x, y)
        peak = float(np.max(np.abs(h)))
        if peak > 1.0 + CONTINUITY_TOLERANCE:
            raise BathymetryError(f"max|h| = {peak:.6g} exceeds 1 on the grid; scale the profile into delta",
                                  {"max_abs": peak})
        y_axis = grid.y
        wrap_jump = float(np.max(np.abs(self.height(grid.length_x, y_axis) - self.height(0.0, y_axis))))
        if wrap_jump > CONTINUITY_TOLERANCE:
            logger.warning(f"[BATHYMETRY] Periodic wrap jump {wrap_jump:.3e} at x=0/Lx; "
                           f"residual certification will be interior only")
        if self.y_dependent:
            logger.warning("[BATHYMETRY] Bottom depends on y; reduced equations only use h and h_x")
        return BathymetrySample(h=Field2D(grid, h), h_x=Field2D(grid, self.slope(x, y)),
                                wrap_jump=wrap_jump, y_dependent=self.y_dependent)

    def excluded_rows(self, grid: Grid2D, margin: int = DEFAULT_EXCLUDED_MARGIN) -> np.ndarray:
        """Boolean mask over x-indices within ``margin`` cells of a break or the box edge"""
        index = np.arange(grid.nx)
        mask = np.zeros(grid.nx, dtype=bool)
        positions = [b / grid.dx for b in self.breaks if 0.0 < b < grid.length_x] + [0.0, float(grid.nx)]
        for position in positions:
            distance = np.abs(index - position)
            distance = np.minimum(distance, grid.nx - distance)
            mask |= distance <= margin
        return mask

    def to_dict(self) -> Dict[str, Any]:
        return {"segments": [s.to_dict() for s in self.segments]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Bathymetry':
        if "segments" not in data:
            raise BathymetryError("Bathymetry document needs a 'segments' list")
        return make_bathymetry(data["segments"])


def make_bathymetry(segments: Iterable[SegmentSpec]) -> Bathymetry:
    """Validate a segment list: increasing breaks, continuity, no curvature"""
    parsed = [_coerce_segment(spec) for spec in segments]
    if not parsed:
        raise BathymetryError("Bathymetry needs at least one segment")
    for left, right in zip(parsed, parsed[1:]):
        if not right.x_break > left.x_break:
            raise BathymetryError(f"Segment breaks must be strictly increasing ({left.x_break} >= {right.x_break})")
        jump = abs(left.height(right.x_break) - right.height(right.x_break))
        y_jump = abs(left.y_slope - right.y_slope)
        if jump > CONTINUITY_TOLERANCE or y_jump > CONTINUITY_TOLERANCE:
            raise DiscontinuityError(f"h jumps by {max(jump, y_jump):.3e} at x={right.x_break}",
                                     x_break=right.x_break, jump=max(jump, y_jump))
    logger.debug(f"[BATHYMETRY] Built profile with {len(parsed)} segment(s)")
    return Bathymetry(parsed)


def flat_bathymetry() -> Bathymetry:
    return Bathymetry([Segment(0.0, 0.0, 0.0)])


def ramp_bathymetry(length_x: float, rise: float = 1.0, fraction: float = 0.5) -> Bathymetry:
    """Ramp from 0 to ``rise`` over [0, fraction*Lx], then a shelf"""
    x_top = fraction * length_x
    return make_bathymetry([(0.0, rise / x_top, 0.0), (x_top, 0.0, rise)])


def bottom_term_values(u: np.ndarray, u_x: np.ndarray, h: np.ndarray, h_x: np.ndarray,
                       delta: float) -> np.ndarray:
    return -0.25 * delta * (2.0 * h * u_x + h_x * u)


def bottom_term(u: Field2D, b: Bathymetry, delta: float) -> Field2D:
    """-(delta/4)(2 h u_x + h_x u) with spectral u_x and analytic h, h_x"""
    if delta == 0.0:
        return Field2D.zeros(u.grid)
    sample = b.sample(u.grid)
    u_x = derivative_values(u.values, u.grid, order_x=1)
    return u.like(bottom_term_values(u.values, u_x, sample.h.values, sample.h_x.values, delta))
