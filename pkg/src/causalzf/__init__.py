"""Optimal-norm causal zero-forcing precoders for FIR MIMO channels.

`estimate_gamma_opt` finds the smallest achievable peak norm of a causal
right inverse from finite Toeplitz sections; `precode` builds a precoder
meeting a given norm bound; `verify_precoder` certifies the result on grids
independent of the construction.
"""

from .colligation import (
    Colligation,
    NodeSpec,
    Precoder,
    Tolerances,
    factor_kernel,
    factor_kernel_taylor,
    precode,
    realize_precoder,
    solve_colligation,
)
from .errors import (
    CausalZFError,
    ContractionViolationError,
    DimensionMismatchError,
    InconsistentIsometryError,
    InvalidScaleError,
    MalformedInputError,
    MonotonicityError,
    NotPositiveKernelError,
    NotRightInvertibleError,
    NumericalFailureError,
    RealizationError,
)
from .gammaopt import (
    ConvergenceRecord,
    StopReason,
    build_gamma_section,
    delta_c_grid,
    estimate_gamma_opt,
    estimate_hinf_norm,
    rho_of_section,
)
from .tfun import CoeffSeries, DiscPoint, adjoint_coeff, eval_at, scale
from .verify import (
    VerificationGrid,
    VerificationReport,
    bezout_residual,
    brute_force_rho,
    peak_norm_certificate,
    verify_precoder,
)

__version__ = "0.1.0"

__all__ = [
    "CoeffSeries",
    "DiscPoint",
    "adjoint_coeff",
    "eval_at",
    "scale",
    "CausalZFError",
    "Colligation",
    "ContractionViolationError",
    "ConvergenceRecord",
    "DimensionMismatchError",
    "InconsistentIsometryError",
    "InvalidScaleError",
    "MalformedInputError",
    "MonotonicityError",
    "NodeSpec",
    "NotPositiveKernelError",
    "NotRightInvertibleError",
    "NumericalFailureError",
    "Precoder",
    "RealizationError",
    "StopReason",
    "Tolerances",
    "VerificationGrid",
    "VerificationReport",
    "bezout_residual",
    "brute_force_rho",
    "build_gamma_section",
    "delta_c_grid",
    "estimate_gamma_opt",
    "estimate_hinf_norm",
    "factor_kernel",
    "factor_kernel_taylor",
    "peak_norm_certificate",
    "precode",
    "realize_precoder",
    "rho_of_section",
    "solve_colligation",
    "verify_precoder",
]
