"""Lagged (cross-)covariance operator estimation for functional time series
in Cartesian product Hilbert spaces, with Monte Carlo verification of the
explicit error-bound formulas."""

from .bounds import (
    BoundReport,
    Far1ClosedBounds,
    MomentCaps,
    far1_closed_bounds,
    prod_propagation,
    sum_propagation,
    tau,
    tau_tilde,
    xi_auto,
    xi_cross,
)
from .config import (
    ExperimentConfig,
    experiment_from_config,
    load_config,
    model_from_config,
    model_to_config,
)
from .covariance import (
    CovEstimate,
    LaggedCovariance,
    analytic_block_cov,
    analytic_cov_far1,
    analytic_nu_moments,
    empirical_auto_cov,
    empirical_cross_cov,
    estimation_error,
)
from .errors import (
    ConfigError,
    DimensionError,
    FtscovError,
    InsufficientMomentsError,
    ModelError,
    NumericError,
    OracleError,
    StabilityError,
    WindowError,
)
from .experiments import MCCell, MCSummary, run_bound_verification, run_suite
from .grid import (
    GridFunction,
    GridSpace,
    LinearOp,
    OperatorNorms,
    adjoint,
    compose,
    hs_norm,
    identity_op,
    inner,
    op_norms,
    op_power,
    tensor,
    zero_op,
)
from .processes import (
    CrossLink,
    InnovationLaw,
    LinearRule,
    ModelSpec,
    MomentSet,
    PathBundle,
    TailRule,
    brownian_bridge_law,
    child_seed,
    commuting_far_model,
    commuting_operator,
    couple,
    degenerate_model,
    estimate_moments,
    far_model,
    fma1_model,
    gaussian_kernel_op,
    iid_model,
    linear_model,
    simulate,
    substream,
    with_cross_link,
)
from .product import (
    BlockOp,
    LagWindow,
    ProductElement,
    compose_blocks,
    embed,
    lag_window,
    product_inner,
    product_tensor,
)
from .spectral import (
    EigenSystem,
    PerturbationReport,
    commuting_block_eigmax,
    commuting_far_eigbound,
    eig,
    nuclear_identity_check,
    perturbation_checks,
    sign_align,
)
from .yulewalker import (
    YuleWalker,
    YWDiagnostics,
    YWFit,
    ma1_inversion_coefficients,
    truncation_decay,
    tychonoff_inverse,
    yw_fit,
    yw_fit_truncated,
)

__version__ = "0.1.0"
