"""Tie-breaker versus regression discontinuity designs: kernel constants,
asymptotic MSE, fixed-bandwidth efficiency, local linear estimation and
Monte Carlo evaluation."""

from .asymptotics import (
    AmseTerms,
    Design,
    DesignComparison,
    ProblemPrimitives,
    alpha,
    amse_rdd,
    amse_tbd,
    amse_tbd_p,
    bias_variance_curve,
    compare_designs,
    gamma,
    h_opt,
    mse_constant_ratio,
    optimal_p,
    relative_amse,
    relative_amse_p,
    safe_p_interval,
    theta_star,
)
from .errors import BracketError, DomainError, KernelValidationError, SingularFitError
from .estimator import (
    AssignmentRule,
    Dataset,
    FitResult,
    Strategy,
    assign,
    fit_local_linear,
    sandwich_variance,
    smoother_weights,
)
from .finite_bandwidth import (
    EffCurve,
    FixedBwMoments,
    asymptotic_var_beta3,
    bias_free_bandwidth,
    eff_bc,
    eff_curve,
    eff_theory,
    eff_ts,
    fixed_bw_moments,
    leading_bias,
    monotonicity_certificate,
)
from .kernels import (
    KERNEL_NAMES,
    Kernel,
    MomentSet,
    eval_kernel,
    full_moment,
    get_kernel,
    half_moment,
    kernel_constants,
    load_kernel_csv,
    tabulated_kernel,
    truncated_moment,
)
from .monte_carlo import (
    DgpSpec,
    EffSummary,
    XSampler,
    empirical_eff,
    simulate_dgp,
    validate_bias_variance,
    validate_mse_ratio,
)

__version__ = "0.1.0"
