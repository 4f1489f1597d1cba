"""Differentiable spline approximation kernels.

Exact k-piecewise regression with block-sparse weak Jacobians, differentiable
NURBS evaluation (including knot gradients), gradient-based surface fitting,
and an energy-minimizing finite-element Poisson solver.
"""

from ._core import (  # noqa: F401
    BlockSparseJacobian,
    DimensionError,
    EvalCache,
    FitConfig,
    FitReport,
    InfeasibleError,
    IntervalPartition,
    KernelConfigError,
    KernelDivergenceError,
    KernelDomainError,
    KernelNumericError,
    KnotGradMode,
    KnotVector,
    LabelGrid,
    NurbsCurve,
    NurbsGradients,
    NurbsSurface,
    Optimizer,
    PiecewiseFit,
    SolveMethod,
    StructuredMesh,
    __version__,
    backward_surface,
    basis_funs,
    basis_funs_du,
    bukin_target,
    chamfer_distance,
    chamfer_distance_x100,
    connected_components,
    diffusivity_field,
    eval_curve,
    eval_surface_grid,
    eval_surface_grid_with_cache,
    exact_solution_and_forcing,
    find_span,
    fit_kpiecewise,
    fit_surface,
    fit_with_partition,
    gauss_quadrature,
    gradcheck_suite,
    jacobian,
    l2_error_vs_exact,
    lagrange_basis_1d,
    laplacian_regularizer,
    mse_loss,
    num_threads,
    pcw2d_forward,
    pcw2d_vjp,
    polyfit_interval,
    random_surface_for_target,
    sample_omega,
    set_num_threads,
    solve_poisson,
    vjp,
)
