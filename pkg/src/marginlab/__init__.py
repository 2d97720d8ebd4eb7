"""Max-margin geometry of gradient methods on separable data.

Exact optimal margins via a simplex min-norm solver, the smoothed margin and
its gradient schedules, deep linear networks on a product of spheres, RKHS
margins, and checks of the resulting rate and bias inequalities.
"""
__version__ = "0.1.0"

from ._kernels import BACKEND
from .analysis import (CheckResult, RateFit, VerificationReport, emit_report, fit_power_law,
                       fit_rate, verify_trajectory)
from .dataset import (CANONICAL, Dataset, ValidationOutcome, Violation, canonical,
                      generate_separable, load_csv, store_csv, validate)
from .deep import (Architecture, deep_margin, deep_product, deep_subgradient_check,
                   layer_gradients, riemannian_ascent, tangent_project, trace_identity_residual)
from .errors import (ConvergenceError, DatasetFormatError, DatasetMismatchError, GenerationError,
                     MarginLabError, NonSeparableError, NumericalError, RateFitError)
from .kernel import KernelModel, KernelSpec, gram, kernel_ascent, kernel_margin, kernel_optimal_margin
from .margin import (MarginSolution, hard_margin, interlace_bounds, interlace_check, kl_check,
                     min_norm_gram, min_norm_point, min_norm_subgradient, normalize, optimal_margin,
                     support_set)
from .optimizers import Schedule, Trajectory, flow_run, gd_run, geometric_steps
from .smooth import (SmoothMarginParams, boltzmann_weights, empirical_risk, log_empirical_risk,
                     smooth_margin_grad, smooth_margin_value)

__all__ = [
    "Architecture", "BACKEND", "boltzmann_weights", "CANONICAL", "canonical", "CheckResult",
    "ConvergenceError", "Dataset", "DatasetFormatError", "DatasetMismatchError", "deep_margin",
    "deep_product", "deep_subgradient_check", "emit_report", "empirical_risk", "fit_power_law",
    "fit_rate", "flow_run", "gd_run", "generate_separable", "GenerationError", "geometric_steps",
    "gram", "hard_margin", "interlace_bounds", "interlace_check", "kernel_ascent", "kernel_margin",
    "kernel_optimal_margin", "KernelModel", "KernelSpec", "kl_check", "layer_gradients", "load_csv",
    "log_empirical_risk", "MarginLabError", "MarginSolution", "min_norm_gram", "min_norm_point",
    "min_norm_subgradient", "NonSeparableError", "normalize", "NumericalError", "optimal_margin",
    "RateFit", "RateFitError", "riemannian_ascent", "Schedule", "smooth_margin_grad",
    "smooth_margin_value", "SmoothMarginParams", "store_csv", "support_set", "tangent_project",
    "trace_identity_residual", "Trajectory", "validate", "ValidationOutcome", "VerificationReport",
    "verify_trajectory", "Violation",
]
