"""
Shallow-water wave module for dispersia

(2+1)-dimensional KdV, fifth-order KdV, Gardner and KP equations over
flat and piecewise-linear bottoms: exact solutions, residual audits,
Boussinesq compatibility checks and pseudo-spectral evolution.
"""

__version__ = "1.0.0"
