"""Approximate Fekete nodes for Gaussian kernel interpolation.

The node sets maximize the determinant of the Gram matrix of a truncated
orthonormal kernel expansion; for the Gaussian kernel in one dimension that
determinant factors, and the maximization becomes a convex log-energy
minimization solved exactly by a projected Newton method.  The package also
ships the machinery to judge such node sets: kernel interpolants under
runtime-selected precision, power functions, Lebesgue constants, greedy and
Chebyshev baselines, error bounds, and a CLI that tabulates the comparisons.
"""

from .numerics import (
    Matrix,
    NotPositiveDefiniteError,
    PrecisionContext,
    PrecisionError,
    cholesky_factor,
    cholesky_solve,
    lu_logdet,
    make_context,
)
from .basis import (
    CoincidentNodesError,
    GaussianKernel,
    Interval,
    PointSet,
    Rectangle,
    basis_function,
    basis_matrix,
    det_factorization_discrepancy,
    log_weighted_vandermonde,
    tail_sum,
    tail_sup_bound,
    truncated_kernel,
)
from .fekete import (
    ConvergenceError,
    EnergyProblem,
    SolveReport,
    energy,
    energy_gradient,
    energy_hessian,
    solve_fekete,
    tensor_fekete,
)
from .interpolation import (
    Interpolant,
    TensorInterpolant,
    auto_digits,
    fit,
    gram,
    kernel_columns,
    lagrange_values,
    lebesgue_constant,
    max_power_on_grid,
    power_function,
    tensor_fit,
    tensor_power,
)
from .baselines import (
    GreedyTrace,
    chebyshev_points,
    equispaced_points,
    fill_distance,
    p_greedy,
)
from .bounds import (
    RATE_PREFACTOR,
    TargetFunction,
    WeightSequence,
    bessel_subspace_kernel,
    bessel_weights,
    fill_distance_bound,
    gaussian_rate_bound,
    generic_uniform_bound,
    log_fill_distance_bound,
    log_gaussian_rate_bound,
    log_generic_uniform_bound,
    log_subspace_bound,
    log_tensor_bound,
    rate_base,
    subspace_bound,
    tensor_bound,
)

__version__ = "0.1.0"

__all__ = [
    "CoincidentNodesError",
    "ConvergenceError",
    "EnergyProblem",
    "GaussianKernel",
    "GreedyTrace",
    "Interpolant",
    "Interval",
    "Matrix",
    "NotPositiveDefiniteError",
    "PointSet",
    "PrecisionContext",
    "PrecisionError",
    "RATE_PREFACTOR",
    "Rectangle",
    "SolveReport",
    "TargetFunction",
    "TensorInterpolant",
    "WeightSequence",
    "auto_digits",
    "basis_function",
    "basis_matrix",
    "bessel_subspace_kernel",
    "bessel_weights",
    "chebyshev_points",
    "cholesky_factor",
    "cholesky_solve",
    "det_factorization_discrepancy",
    "energy",
    "energy_gradient",
    "energy_hessian",
    "equispaced_points",
    "fill_distance",
    "fill_distance_bound",
    "fit",
    "gaussian_rate_bound",
    "generic_uniform_bound",
    "gram",
    "kernel_columns",
    "lagrange_values",
    "lebesgue_constant",
    "log_fill_distance_bound",
    "log_gaussian_rate_bound",
    "log_generic_uniform_bound",
    "log_subspace_bound",
    "log_tensor_bound",
    "log_weighted_vandermonde",
    "lu_logdet",
    "make_context",
    "max_power_on_grid",
    "p_greedy",
    "power_function",
    "rate_base",
    "solve_fekete",
    "subspace_bound",
    "tail_sum",
    "tail_sup_bound",
    "tensor_bound",
    "tensor_fekete",
    "tensor_fit",
    "tensor_power",
    "truncated_kernel",
]
