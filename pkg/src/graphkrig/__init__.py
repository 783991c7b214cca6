"""Kriging-based semi-supervised learning on graphs.

Classic graph regularizers expressed as kriging predictors, plus an
empirical stationary-correlation covariance estimated from the observed
responses via the variogram, with a holdout evaluation harness and CLI.
"""
from .data import BINARY, CONTINUOUS, LabeledGraphData, load_dataset
from .empirical import (
    CorrelationFit,
    CVResult,
    EmpiricalConfig,
    build_covariance,
    cross_validate,
    estimate_mean,
    fit_and_predict,
    fit_correlation,
    naive_correlations,
    predict_empirical,
    random_walk_config,
    tikhonov_config,
)
from .errors import ConvergenceError, DataFormatError, GraphKrigError, NotPositiveDefiniteError
from .evaluation import (
    ExperimentConfig,
    ExperimentResult,
    auc,
    baseline_predict,
    holdout_split,
    mse,
    run_experiment,
)
from .graphs import (
    HubAuthorityQuantities,
    SimilarityGraph,
    WalkQuantities,
    WeightedDigraph,
    from_edge_list,
    hub_authority,
    read_edge_list,
    similarity_matrix,
    walk_quantities,
    weight_laplacian,
)
from .kriging import (
    DELTA_INV_LIMIT,
    KrigingModel,
    PartitionedData,
    predict_full,
    predict_partial,
    predict_variance,
)
from .linalg import SymEig, psd_project, pseudo_inverse, spd_solve, sym_eig
from .smoothers import (
    SmootherSpec,
    assemble,
    interpolated_smooth,
    kriging_equivalent,
    quadratic_smooth,
    smooth,
)

__version__ = "0.1.0"
