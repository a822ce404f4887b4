"""
Exception hierarchy for the shallow-water toolkit

Every error carries the process exit code the CLI maps it to.
"""

from typing import Any, Dict, List, Optional


class DispersiaError(Exception):
    """Base class for all toolkit errors"""

    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": type(self).__name__,
            "message": self.message,
            "exit_code": self.exit_code,
            "details": self.details,
        }


class ValidationError(DispersiaError):
    """Invalid inputs: parameters, grids, contracts"""

    exit_code = 2

    @classmethod
    def from_errors(cls, what: str, errors: List[str]) -> 'ValidationError':
        return cls(f"Invalid {what}: " + "; ".join(errors), {"errors": errors})


class EllipticDomainError(ValidationError):
    """Elliptic parameter outside its admissible interval"""


class EllipticDivergenceError(ValidationError):
    """K(m) requested at m = 1"""


class NonZeroMeanError(ValidationError):
    """A field handed to the periodic x-antiderivative has a nonzero row mean"""

    def __init__(self, message: str, row: int, mean: float, tolerance: float):
        super().__init__(message, {"row": row, "mean": mean, "tolerance": tolerance})
        self.row = row
        self.mean = mean
        self.tolerance = tolerance


class ContractError(ValidationError):
    """Incompatible combination of equation, solution, or bathymetry"""


class OrderError(ValidationError):
    """Correction order not available for the requested case"""


class ConfigError(ValidationError):
    """Malformed configuration document"""


class BathymetryError(ValidationError):
    """Invalid bottom profile"""


class DiscontinuityError(BathymetryError):
    """Bottom profile jumps at a segment break"""

    def __init__(self, message: str, x_break: float, jump: float):
        super().__init__(message, {"x_break": x_break, "jump": jump})
        self.x_break = x_break
        self.jump = jump


class NonLinearSegmentError(BathymetryError):
    """A segment carries curvature in x (h_xx != 0)"""


class NumericalError(DispersiaError):
    """Numerical failure: blow-up or a certification threshold not met"""

    exit_code = 3


class BlowUpError(NumericalError):
    """Non-finite values appeared during time stepping"""

    def __init__(self, message: str, time: float):
        super().__init__(message, {"time": time})
        self.time = time


class ThresholdError(NumericalError):
    """A residual, slope, or table check missed its threshold"""


class StorageError(DispersiaError):
    """Reading or writing an artifact failed"""

    exit_code = 4
