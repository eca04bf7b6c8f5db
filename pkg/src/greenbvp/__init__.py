"""Computer-assisted certification of two-point boundary value problems.

An approximate fundamental solution and Green's function, computed in
floating point, are turned into rigorous bounds on the inverse of the BVP
operator. These give error bounds for linear problems and
Newton-Kantorovich existence proofs for nonlinear ones.
"""
from .errors import (AlignmentError, ConfigError, DomainError, FormatError, GreenBVPError,
                     ModeError, ShapeError, SolveError, StateError, UnderflowDiagnostic)
from .interval import Interval, IntervalMatrix, WeightMatrix, iv_arith, norm_upper
from .linear import (FundamentalNodes, GreenNodes, LinearCertificate, SolutionErrorBound,
                     adaptive_weights, bound_H, bound_I_minus_FH, build_green_nodes,
                     certify_linear, finv_bound, verify_inhomogeneous)
from .nonlinear import (NKParameters, NonlinearCertificate, bound_lipschitz, bound_residual,
                        certify_nonlinear, newton_kantorovich, search_radius)
from .problems import (PROBLEMS, LinearBVProblem, LorenzProblem, Mesh, NonlinearBVProblem,
                       builtin_problem, exact_test_problem, exact_testprob_oracle,
                       potential_well_problem, turning_point_problem)
from .solver import (ApproximateSolution, evaluate_solution, export_solution, ingest_solution,
                     solve_linear_bvp, solve_nonlinear_bvp)
from .taylor import MatrixPolynomial, TaylorData, residual_R, taylor_E, taylor_F

__version__ = "0.1.0"
