"""Inexact gradient descent with adaptive error control, derived
proximal-point and augmented-Lagrangian solvers, and desk-scale benchmarks."""

from .core import (DimensionError, LinearOperator, MatrixOperator,
                   NonFiniteError, SmoothProblem, as_matrix, as_operator,
                   as_vector, matvec, operator_norm)
from .trace import (IterationRecord, IterationTrace, TraceOrderError,
                    TraceSchemaError, read_trace_csv, write_trace_csv)
from .oracles import (CfdOracle, ExactOracle, FfdOracle, MoreauOracle,
                      NoisyOracle, OracleError, ProxSubproblem, cfd_gradient,
                      ffd_gradient, minimize_prox_subproblem,
                      moreau_gradient_oracle)
from .igd import (BudgetExhausted, Converged, IgdConfig, OracleFailure,
                  SolveStatus, StationaryCertificate, igd_inner_search,
                  igd_solve, igd_step, ik_upper_bound)
from .prox import (ConvexProblem, GippmConfig, SubproblemProxOracle,
                   gippm_solve, inexact_prox, ippm_baseline_solve, run_preset)
from .alm import (AlmProxOracle, EqualityConstrainedProblem,
                  aug_lagrangian_value, dual_prox_gap_lower_bound,
                  gialm_solve, ialm_baseline_solve)
from .lasso import (LassoInstance, blur_instance, capital_psi, eta_residual,
                    gen_random_instance, gialm_lasso_solve, inner_solve_psi,
                    load_instance, project_linf_ball, psi_gradient,
                    psi_value, save_instance, soft_threshold)
from .rates import (KlTestFunction, RateFit, fit_linear_rate, fit_power_rate,
                    make_kl_function, predicted_exponent, rate_report_rows)

__version__ = "0.1.0"
