"""Gaussian integral means of entire functions and related Fock-space tools."""

from .core import (
    QuadratureConfig,
    adaptive_integrate,
    gamma_half_ratio,
    periodic_trapezoid,
    weighted_power_integral,
)
from .errors import (
    DivergentIntegralError,
    DomainError,
    GaussMeansError,
    NonConvergenceError,
    OverflowGuardError,
)
from .means import (
    means_at_infinity,
    means_derivative,
    means_generic,
    means_monomial,
    means_series_p2,
)
from .polynomial import PowerSeriesFunction, parse_coefficients

__version__ = "0.1.0"
