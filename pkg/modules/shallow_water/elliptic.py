"""
Jacobi elliptic functions and complete elliptic integrals

The second argument m is always the elliptic PARAMETER (modulus squared),
so cn(u, m) with m in [0, 1]; m = 1 is the hyperbolic limit.
"""

import logging
import math
from typing import Tuple, Union

import numpy as np

from .errors import EllipticDivergenceError, EllipticDomainError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

MAX_AGM_ITERATIONS = 64
HYPERBOLIC_SWITCH = 1e-12
_EPS = np.finfo(float).eps


def _check_parameter(m: float, upper_open: bool = False) -> float:
    m = float(m)
    if not math.isfinite(m) or m < 0.0 or m > 1.0:
        raise EllipticDomainError(f"Elliptic parameter m={m} outside [0, 1]", {"m": m})
    if upper_open and m == 1.0:
        raise EllipticDivergenceError("K(m) diverges at m = 1", {"m": m})
    return m


def _agm_sequence(m: float):
    """Arithmetic-geometric mean ladder starting from (1, sqrt(1-m), sqrt(m))"""
    a, b, c = 1.0, math.sqrt(1.0 - m), math.sqrt(m)
    a_values, c_values = [a], [c]
    for _ in range(MAX_AGM_ITERATIONS):
        if abs(c) <= _EPS * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        a_values.append(a)
        c_values.append(c)
    return a_values, c_values


def ellip_k(m: float) -> float:
    """Complete elliptic integral of the first kind, K(m) = pi / (2 agm(1, sqrt(1-m)))"""
    m = _check_parameter(m, upper_open=True)
    a_values, _ = _agm_sequence(m)
    return math.pi / (2.0 * a_values[-1])


def ellip_e(m: float) -> float:
    """Complete elliptic integral of the second kind via the AGM ladder"""
    m = _check_parameter(m)
    if m == 1.0:
        return 1.0
    a_values, c_values = _agm_sequence(m)
    k = math.pi / (2.0 * a_values[-1])
    correction = sum(2.0 ** (n - 1) * c * c for n, c in enumerate(c_values))
    return k * (1.0 - correction)


def e_over_k(m: float) -> float:
    """E(m)/K(m), continuous at m = 1 where it vanishes"""
    m = _check_parameter(m)
    if m == 1.0:
        return 0.0
    return ellip_e(m) / ellip_k(m)


def jacobi(u: ArrayLike, m: float) -> Tuple[ArrayLike, ArrayLike, ArrayLike]:
    """Return (sn, cn, dn) of u for parameter m.

    Uses the descending Landen (AGM) recursion after reducing u modulo 4K(m);
    within 1e-12 of m = 1 the hyperbolic closed forms are returned instead.
    Scalars in, scalars out; arrays are evaluated elementwise.
    """
    m = _check_parameter(m)
    scalar = np.ndim(u) == 0
    u = np.asarray(u, dtype=np.float64)
    if not np.all(np.isfinite(u)):
        raise EllipticDomainError("jacobi requires finite arguments")

    if 1.0 - m < HYPERBOLIC_SWITCH:
        sech = 1.0 / np.cosh(u)
        sn, cn, dn = np.tanh(u), sech, sech.copy()
    elif m == 0.0:
        sn, cn, dn = np.sin(u), np.cos(u), np.ones_like(u)
    else:
        quarter = ellip_k(m)
        period = 4.0 * quarter
        reduced = u - period * np.round(u / period)
        a_values, c_values = _agm_sequence(m)
        depth = len(a_values) - 1
        phi = (2.0 ** depth) * a_values[depth] * reduced
        for n in range(depth, 0, -1):
            ratio = np.clip(c_values[n] * np.sin(phi) / a_values[n], -1.0, 1.0)
            phi = 0.5 * (np.arcsin(ratio) + phi)
        sn, cn = np.sin(phi), np.cos(phi)
        dn = np.sqrt(np.maximum(1.0 - m * sn * sn, 0.0))

    if scalar:
        return float(sn), float(cn), float(dn)
    return sn, cn, dn
