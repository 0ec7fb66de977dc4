"""Sparse high-dimensional VAR estimation toolkit.

Fits VAR(p) models by row-wise lasso, vectorized (weighted) lasso and the
row-wise Dantzig selector, with standardization, adaptive reweighting and
thresholding modifications; estimates innovation covariances and
second-order quantities; and ships a seeded Monte-Carlo benchmark harness
plus a small CLI.
"""
from .errors import (
    ConfigError,
    DataError,
    DegenerateFitError,
    DegenerateInputError,
    FactorizationError,
    InfeasibleError,
    InsufficientDataError,
    InternalError,
    IterationLimitError,
    NonConvergenceError,
    NumericError,
    PivotLimitError,
    SingularityError,
    SparseVarError,
    StabilityError,
    UnboundedError,
)
from .model import (
    CompanionForm,
    MembershipResult,
    SampleDesign,
    SparsityClass,
    TimeSeries,
    VarModel,
    autocov,
    autocov_stacked,
    b_from_coeffs,
    build_design,
    class_budgets,
    class_membership,
    coeffs_from_b,
    companion,
    forecast,
    inverse_spectral_density,
    simulate,
    spectral_density,
    spectral_radius,
    stationary_cov_stacked,
)
from .thresholding import (
    ThresholdRule,
    adaptive_rule,
    hard_rule,
    soft_rule,
    theorem1_bound,
    threshold_matrix,
    threshold_scalar,
    verify_rule_conditions,
)
from .lp import LpProblem, LpSolution, lp_solve
from .estimators import (
    EstimatorConfig,
    PenaltyWeights,
    VarEstimate,
    adaptive_weights,
    back_transform,
    dantzig_row,
    fit,
    lasso_row,
    lasso_vec,
    standardize,
)
from .tuning import TuningRule, bic_score, eric_score, lambda_grid, select
from .covariance import (
    CovCvSpec,
    ResidualMatrix,
    clime_precision,
    clime_precision_from_cov,
    residuals,
    sample_cov,
    thresholded_cov,
)
from .metrics import (
    crit_forecast_mse,
    crit_gamma_error,
    crit_param_error,
    crit_spectral_error,
    fourier_frequencies,
    matrix_norm,
    replication_seed,
    theorem3_bound_check,
    theorem4_bound_check,
)
from .dgp import example1_sigma, random_sparse_var1, random_sparse_varp
from .bench import (
    BenchmarkResult,
    Scenario,
    example1_model,
    example1_scenario,
    example2_model,
    example2_scenario,
    run_monte_carlo,
)

__version__ = "0.1.0"
