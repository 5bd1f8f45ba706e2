"""Robust sparse regression with streaming feature batches.

Recovers sparse regression coefficients and the set of uncorrupted
samples when features arrive in batches and the response vector carries
unbounded adversarial corruption on a minority of samples. The working
uncorrupted set is re-estimated by residual hard thresholding with an
adaptively estimated size; the retained feature set is maintained by
magnitude truncation as batches arrive.
"""

__version__ = "0.1.0"

from .core import (
    FeatureBatch,
    FeatureIdSet,
    FeatureStore,
    SampleIndexSet,
    SparseCoefficients,
    StreamInconsistencyError,
    predict,
    residual,
    restricted_objective,
    set_union,
)
from .datagen import GaussianDesign, GenConfig, GroundTruth, make_instance
from .thresholding import (
    TauEstimate,
    estimate_tau,
    hard_threshold_select,
    sort_by_magnitude,
    update_uncorrupted_set,
)
from .solver import SolveResult, SolverConfig, SolverState, solve
from .baselines import fixed_ratio_thresholding, ols_full, oracle_ols
from .metrics import RunMetrics, f1_set, l2_error, score_run
from .theory import (
    TheoryReport,
    check_prefix_monotonicity,
    check_working_set_bound,
    check_error_bound,
    estimate_strong_convexity,
    lambda_of_gamma,
)

__all__ = [
    "__version__",
    "FeatureBatch", "FeatureIdSet", "FeatureStore", "SampleIndexSet",
    "SparseCoefficients", "StreamInconsistencyError",
    "predict", "residual", "restricted_objective", "set_union",
    "GaussianDesign", "GenConfig", "GroundTruth", "make_instance",
    "TauEstimate", "estimate_tau", "hard_threshold_select",
    "sort_by_magnitude", "update_uncorrupted_set",
    "SolveResult", "SolverConfig", "SolverState", "solve",
    "fixed_ratio_thresholding", "ols_full", "oracle_ols",
    "RunMetrics", "f1_set", "l2_error", "score_run",
    "TheoryReport", "check_prefix_monotonicity", "check_working_set_bound", "check_error_bound",
    "estimate_strong_convexity", "lambda_of_gamma",
]
