"""Numerical toolkit for the Beurling-Ahlfors extension of line and circle
homeomorphisms: dilatation, symmetric distortion, integrability and BMO checks."""

from qcx.boundary_map import (BA1, BA2, BA3, CircleHomeo, LineHomeo, PiecewiseLinear,
                              identity, lift_circle, log_singular, log_singular_circle,
                              normalize, power, rotation, transform, two_slope)
from qcx.distortion import (C0, DistortionSample, NormalizedTriple, F_value, beta_xi_eta,
                            check_bounds, rho, rho_circular, segment_average)
from qcx.extension import ExtensionJet, PointH, dilatation, extend, extend_circle, jet
from qcx.kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BA1", "BA2", "BA3", "BACKEND", "C0", "CircleHomeo", "DistortionSample", "ExtensionJet",
    "F_value", "LineHomeo", "NormalizedTriple", "PiecewiseLinear", "PointH", "beta_xi_eta",
    "check_bounds", "dilatation", "extend", "extend_circle", "identity", "jet",
    "lift_circle", "log_singular", "log_singular_circle", "normalize", "power", "rho",
    "rho_circular", "rotation", "segment_average", "transform", "two_slope",
]
