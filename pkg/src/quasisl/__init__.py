"""Sturm-Liouville problems with four coefficients, written in quasi-derivative form.

    tau u = (1/r) [ -(p (u' + s u))' + s p (u' + s u) + q u ]

Public entry points are re-exported here; see the submodules for details.
"""

from .coefficients import (
    Coefficient,
    Constant,
    Cos,
    Exp,
    Interval,
    Piece,
    Polynomial,
    Power,
    QuadratureConfig,
    Sin,
    SLProblem,
    Sum,
    TruncationConfig,
    classify_regularity,
    delta_interaction_problem,
    effective_potential,
    limit_point_test,
    make_problem,
    validate_problem,
)
from .errors import NumericalError, SLError, ValidationError
from .functions import Bump, GridFunction, SineArch, Smooth, hat, random_bumps
from .lower_bound import (
    LowerBoundResult,
    convergence_order,
    energy_identity_check,
    energy_inequality_quotients,
    greatest_lower_bound,
    integrand_consistency_check,
    jacobi_factorization_residual,
    q_recovery_residual,
)
from .problem_file import load_problem, parse_problem
from .quasi_ode import IVPSpec, SolutionTrajectory, count_zeros, integrate_ivp, solve, wronskian
from .solutions import (
    PrincipalPair,
    disconjugacy_check,
    generalized_boundary_values,
    is_principal,
    positive_solution,
    principal_pair,
)
from .spectral import (
    DIRICHLET,
    NEUMANN,
    BoundaryCondition,
    EigenResult,
    eigenvalue,
    eigenvalues,
    minimizer_check,
    monotonicity_experiment,
    rayleigh_quotient,
    shoot_mismatch,
)

__version__ = "0.1.0"
