"""Significance tests along penalized-regression solution paths.

Covariance test statistics for the lasso, SCAD, and MCP penalties; a
data-driven model-size selector; and a Monte Carlo harness for null
calibration, independence, sure-screening, selection, and power studies.
"""

__version__ = "0.1.0"

from .covtest import (
    CovSeries,
    cov_stat_general,
    cov_stat_orthogonal,
    mcp_piecewise,
    pvalue_exp,
    scad_piecewise,
    series_from_knot_values,
    series_from_path,
    tilde_transform,
)
from .designs import (
    DesignMatrix,
    ResponseSpec,
    make_design,
    padded_beta,
    population_covariance,
    simulate_response,
    standardize_columns,
)
from .errors import (
    ContractError,
    DeletionEventError,
    NumericalError,
    ParameterError,
    PathsigError,
    SingularityError,
)
from .model_size import SelectorConfig, expected_q_after, q_statistic, select_k0, snr
from .path import (
    LassoPath,
    PathKnot,
    kkt_violation,
    lars_lasso_path,
    orthogonal_knots,
    path_until_entering,
    restricted_lasso_fit,
)
from .penalties import LASSO, PenaltySpec, mcp, penalty_value, scad, threshold, threshold_oracle
from .studies import (
    StudyConfig,
    StudyResult,
    default_config,
    exp1_cdf,
    ks_statistic,
    run_independence,
    run_null_qq,
    run_power,
    run_screening,
    run_study,
    run_table1,
    summarize,
)

__all__ = [
    "CovSeries",
    "ContractError",
    "DeletionEventError",
    "DesignMatrix",
    "LASSO",
    "LassoPath",
    "NumericalError",
    "ParameterError",
    "PathKnot",
    "PathsigError",
    "PenaltySpec",
    "ResponseSpec",
    "SelectorConfig",
    "SingularityError",
    "StudyConfig",
    "StudyResult",
    "cov_stat_general",
    "cov_stat_orthogonal",
    "default_config",
    "exp1_cdf",
    "expected_q_after",
    "kkt_violation",
    "ks_statistic",
    "lars_lasso_path",
    "make_design",
    "mcp",
    "mcp_piecewise",
    "orthogonal_knots",
    "padded_beta",
    "path_until_entering",
    "penalty_value",
    "population_covariance",
    "pvalue_exp",
    "q_statistic",
    "restricted_lasso_fit",
    "run_independence",
    "run_null_qq",
    "run_power",
    "run_screening",
    "run_study",
    "run_table1",
    "scad",
    "scad_piecewise",
    "select_k0",
    "series_from_knot_values",
    "series_from_path",
    "simulate_response",
    "snr",
    "standardize_columns",
    "summarize",
    "threshold",
    "threshold_oracle",
    "tilde_transform",
]
