"""Exact spectral sum rules for the sphere Laplacian with a band-limited density."""
from .errors import (DensityValidationError, DomainError, NonConverged, NotPositiveDefinite,
                     PositivityViolation, RealityViolation, SingularPoint, SumRuleError,
                     UnsupportedOrder)
from .greens import dilog, geodesic_cosine, green_closed, green_series, green_series_cesaro, trilog
from .harmonics import (DensitySpec, GauntTable, density_eval, gaunt, load_density,
                        validate_density, wigner3j, ylm)
from .quadrature import SphereGrid, integrate_sphere, oracle_I1, oracle_J1, rotate_density
from .rayleigh_ritz import (convergence_sweep, numeric_sum_rule, solve_spectrum,
                            weyl_tail)
from .spectral_core import (NestedSums, SpectralEngine, assemble_sigma_matrix, homogeneous_z,
                            integral_I1, integral_I2, integral_I3, integral_J1, integral_J2)
from .sumrules import E0Coefficients, SumRuleReport, e0_coefficients, exact_sum_rule

__version__ = "0.1.0"

__all__ = [
    "SumRuleError", "DomainError", "SingularPoint", "DensityValidationError", "PositivityViolation",
    "RealityViolation", "NonConverged", "UnsupportedOrder", "NotPositiveDefinite",
    "dilog", "trilog", "geodesic_cosine", "green_closed", "green_series", "green_series_cesaro",
    "DensitySpec", "GauntTable", "density_eval", "gaunt", "load_density", "validate_density",
    "wigner3j", "ylm",
    "SphereGrid", "integrate_sphere", "oracle_I1", "oracle_J1", "rotate_density",
    "solve_spectrum", "numeric_sum_rule", "weyl_tail", "convergence_sweep",
    "NestedSums", "SpectralEngine", "assemble_sigma_matrix", "homogeneous_z",
    "integral_I1", "integral_I2", "integral_I3", "integral_J1", "integral_J2",
    "E0Coefficients", "SumRuleReport", "e0_coefficients", "exact_sum_rule",
]
