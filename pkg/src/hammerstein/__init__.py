"""Certified monotone solvers for nonlinear integral equations on the half-line.

The package discretises f(x) = int_0^inf K(x, t) G(f(t)) dt on a truncated
grid, iterates from the constant ceiling, and certifies the structural
conditions, the geometric convergence envelope and the analytic bounds
numerically.  A companion solver handles the combined pointwise-plus-integral
equation built on top of the same kernel.
"""

__version__ = "0.1.0"

from .analysis import (AsymptoteCertificate, CertificateBundle,
                       ExcessIntegralCertificate, TailIntegralCertificate,
                       UniquenessProbeReport, asymptote_certificate,
                       excess_integral_certificate, jensen_certificate,
                       tail_integral_certificate, uniqueness_probe)
from .errors import (ConfigError, DomainViolationError, HammersteinError,
                     HypothesisNotMetError, InconsistentReportError,
                     InvalidSpecError, NonConvergenceError,
                     NumericalBreakdownError, SpecRejectedError)
from .kernels import (BaseKernel, ConditionReport, KernelSpec, ModulationSet,
                      check_kernel_conditions, eval_base_kernel, eval_kernel,
                      gamma_profile, kernel_matrix, lambda_star_excess_integral,
                      row_mass_at)
from .nemytsky import (NemytskyConditionReport, NemytskyReport, NemytskySpec,
                       check_nemytsky_conditions, eval_G0, eval_G1,
                       solve_nemytsky)
from .nonlinearity import (GConditionReport, NonlinearitySpec,
                           check_G_conditions, eval_G, eval_Q, find_eta,
                           power_linear_scaling_ratio)
from .picard import (OperatorMatrix, SolveReport, apply_hammerstein,
                     assemble_operator, estimate_sigma0, evaluate_profile,
                     fixed_point_iterate, rate_envelope, solve_picard,
                     verify_rate_bound)
from .quadrature import GAUSS, TRAPEZOID, HalfLineGrid, build_grid, integrate, refine
