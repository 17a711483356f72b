"""Finite-volume solver for a degenerate drift-diffusion / Poisson system.

The package discretizes a conserved species with concentration c in
(0, 1), driven by the gradient of log(c/(1-c)) + phi, coupled to the
Poisson equation -lambda^2 * Laplace(phi) = c + doping.  Four two-point
flux schemes are provided, together with a damped Newton solver with
parameter embedding, structural diagnostics (energy decay, mass
conservation, maximum principles), and CSV-emitting experiment drivers.
"""

__version__ = "0.1.0"

from . import physics
from .fluxes import (ALL_SCHEMES, FaceState, SchemeKind, coercivity_profile,
                     face_concentration, face_dissipation, flux,
                     flux_with_derivatives, flux_with_derivatives_logit,
                     mean_face_concentration)
from .mesh import (AdmissibleMesh, build_triangulated_rect_2d,
                   build_uniform_1d, validate)
from .assembly import (STATIONARY, DirichletC, DirichletPhi, DiscreteState,
                       FaceBC, NeumannC, NeumannPhi, ProblemSpec, RobinGate,
                       jacobian, residual)
from .solver import (NewtonStats, SingularSystemError, SolverConfig,
                     SolverFailure, TimeGrid, embed_and_solve, linear_solve,
                     march, newton_solve, solve_stationary, solve_step)
from .diagnostics import (StepDiagnostics, discrete_energy, eoc, error_norms,
                          linf_phi_check, mmatrix_witness_check,
                          terminal_current, total_dissipation, total_mass)

__all__ = [
    "__version__",
    "physics",
    "ALL_SCHEMES", "FaceState", "SchemeKind", "coercivity_profile",
    "face_concentration", "face_dissipation", "flux",
    "flux_with_derivatives", "flux_with_derivatives_logit",
    "mean_face_concentration",
    "AdmissibleMesh", "build_triangulated_rect_2d", "build_uniform_1d",
    "validate",
    "STATIONARY", "DirichletC", "DirichletPhi", "DiscreteState", "FaceBC",
    "NeumannC", "NeumannPhi", "ProblemSpec", "RobinGate", "jacobian",
    "residual",
    "NewtonStats", "SingularSystemError", "SolverConfig", "SolverFailure",
    "TimeGrid", "embed_and_solve", "linear_solve", "march", "newton_solve",
    "solve_stationary", "solve_step",
    "StepDiagnostics", "discrete_energy", "eoc", "error_norms",
    "linf_phi_check", "mmatrix_witness_check", "terminal_current",
    "total_dissipation", "total_mass",
]
