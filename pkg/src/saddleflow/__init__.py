"""Accelerated primal-dual mirror-descent flows for constrained saddle problems.

The package solves ``min_x max_y F(x) + x'Hy - G(y)`` over closed convex sets
by integrating an accelerated mirror-descent ODE, and ships the pieces needed
to certify its convergence: reference oracles, rate fits, network problem
builders and an experiment runner.
"""

from .dynamics import (ContractError, FlowParams, FlowState, accelerated_field, baseline_field,
                       equilibrium_from_saddle, rhs_accelerated, rhs_baseline,
                       rhs_baseline_projected)
from .functions import (Linear, Logistic, LogSumExp, PlusQuadraticForm, Quadratic, Separable,
                        SmoothFunction, Zero)
from .geometry import (Ball, Box, ConvexSet, DimensionError, ProductSet, Simplex, WholeSpace,
                       distance_to, project, set_from_dict)
from .graph import Graph, erdos_renyi, is_connected, kron_laplacian, laplacian
from .integrator import (BlowUpError, DivergenceError, IntegrationError, IntegratorConfig,
                         Trajectory, integrate, log_samples)
from .mirror import (BlockMap, EntropyMap, EuclideanMap, MirrorDomainError, MirrorMap,
                     bregman_conjugate, conjugate_value, grad, grad_at_conjugate,
                     grad_conjugate, map_from_dict)
from .netapps import (DistOptInstance, TopologyError, ZeroSumInstance, build_distopt,
                      build_zerosum, distopt_metrics, make_logistic_instance,
                      make_lse_zerosum_instance, zerosum_metrics)
from .oracle import (OracleError, ReferenceSolution, augment_reference, fit_rate, fit_window,
                     solve_extragradient, solve_quadratic_kkt)
from .problem import (SaddleCandidate, SaddleProblem, duality_gap, kkt_residual,
                      lagrangian_value, lyapunov_value, random_quadratic_problem)

__version__ = "0.1.0"
