"""Exact toric heights, roof functions and equidistribution criteria."""
from .loglinear import LogLinear, log_of
from .exactgeom import Polytope, hull, mixed_volume, inradius, lp_solve
from .concave import PAConcave, AffineForm, legendre_dual, sup_convolution, integral, mixed_integral
from .toric import (
    Place,
    VirtualSupport,
    ToricAdelicDivisor,
    Canonical,
    Metric,
    Roof,
    DivisorError,
    PreconditionError,
    analyze,
    example2,
    minima,
    volumes,
    twist,
)
from .equidist import LaurentPolynomial, balanced_gradients, gauss_mahler, is_wide
from .heights import RootPoint, height, weil_height

__version__ = "0.1.0"
