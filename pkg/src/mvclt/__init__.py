"""Explicit multivariate normal-approximation bounds for functions of independent variables."""

from .bounds import (
    BoundReport,
    GaussianTarget,
    NotPositiveDefiniteError,
    SmoothnessConstants,
    UNIT_CONSTANTS,
    jacobi_eigh,
    slepian_bound,
    stein_bound,
    sym_operator_norms,
)
from .core import (
    ComponentDistribution,
    JointTable,
    ProductModel,
    StatisticVector,
    ZSummary,
    build_joint_table,
    cond_exp,
    d_alpha,
    diff_D,
    diff_d,
    exact_summary,
    expect_k,
    moments,
    z_alpha_moments,
)
from .identities import identity_checks
from .montecarlo import McConfig, mc_estimates
from .quadforms import QuadFormSpec, build_quadratic_form, qf_bound, qf_clt_sweep, qf_conditions
from .rademacher import malliavin_derivative, rademacher_bounds, t_alpha_matrix
from .runs import RunsSpec, bernoulli_runs_suite, build_runs_statistic, runs_bound
from .verify import bound_check_suite, discrepancy, gaussian_expectation, make_cosine_family

__version__ = "0.1.0"
