"""Spectral solver for the radially symmetric, spatially homogeneous, non-cutoff
Boltzmann equation with Maxwellian molecules, with its verification harness.

Modules: ``specfun`` (special functions, radial basis), ``cross_section``
(angular cross sections and singular quadrature), ``spectrum`` (eigenvalue and
coupling tables), ``cascade`` (mode cascade solvers), ``field`` (profiles,
norms, certificates), ``fourier`` (Fourier-side identities), ``verify`` and
``cli``.
"""

from .cascade import (ExpSumSolution, InitialData, ModeCoefficients, Trajectory, evaluate, rhs,
                      solve_closed_form, solve_numeric)
from .cross_section import (Form, QuadratureSpec, SingularityModel, angular_moment, beta_eval,
                            regularized_cos_moment, regularized_moment)
from .errors import (ConfigError, DivergenceError, DomainError, NumericalError, QuadratureError,
                     RadBoltzError, SingularityError, TermBudgetError)
from .spectrum import (SpectrumTables, asymptotic_exponent_fit, build_tables, coupling_bound_check,
                       eigenvalue_general, no_resonance_check)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DivergenceError", "DomainError", "ExpSumSolution", "Form", "InitialData",
    "ModeCoefficients", "NumericalError", "QuadratureError", "QuadratureSpec", "RadBoltzError",
    "SingularityError", "SingularityModel", "SpectrumTables", "TermBudgetError", "Trajectory",
    "angular_moment", "asymptotic_exponent_fit", "beta_eval", "build_tables", "coupling_bound_check",
    "eigenvalue_general", "evaluate", "no_resonance_check", "regularized_cos_moment",
    "regularized_moment", "rhs", "solve_closed_form", "solve_numeric",
]
