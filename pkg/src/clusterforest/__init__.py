"""Clustering-based random forests with batch-cost incremental retraining.

The ensemble splits nodes by weighted k-means instead of threshold
scanning; per-feature weights come from label-relevance statistics that
can absorb new data in time proportional to the batch, so periodic
retraining never re-reads the accumulated history for the weighting
stage. An optional noise layer emulates approximate distance and count
estimation.
"""

from .baseline import CartEnsemble, CartTree, build_cart, cart_ensemble
from .clustering import (
    Centroids,
    NoiseConfig,
    assign,
    kmeanspp_init,
    supervised_kmeans,
    update_centroids,
    weighted_sq_distance,
)
from .costmodel import (
    clustering_cost,
    eval_cost,
    kp_load_cost,
    leaf_label_cost,
    measure_norms,
    retrain_cost_breakdown,
    weights_update_cost,
)
from .data import (
    Dataset,
    NormParams,
    SampleSet,
    StreamPlan,
    align_classes,
    apply_norm,
    bootstrap_sample,
    concat_datasets,
    fold_indices,
    load_csv,
    make_folds,
    normalize,
    one_hot_encode,
    stream_split,
)
from .errors import (
    ClassCatalogError,
    ClusterForestError,
    ConfigError,
    DataParseError,
    DataSchemaError,
    EmptyInputError,
    InsufficientDataError,
    InsufficientPointsError,
    ModelFormatError,
    ShapeError,
    SplitError,
    UndefinedMetricError,
)
from .forest import (
    Forest,
    ForestConfig,
    Tree,
    TreeNode,
    build_forest,
    build_tree,
    leaf_label_classification,
    leaf_label_regression,
    retrain_forest,
)
from .inference import (
    accuracy,
    evaluate,
    predict,
    rmse,
    roc_auc,
    traverse,
    tune_threshold,
    weighted_entropy_by_depth,
)
from .model_io import load_model, save_model
from .rng import Rng, derive_seed
from .synthetic import drifting_stream, gaussian_blobs, unbalanced_binary
from .weights import (
    EtaState,
    FeatureWeights,
    PearsonState,
    eta_stats,
    eta_update,
    eta_weights,
    pearson_stats,
    pearson_update,
    pearson_weights,
    state_max_rel_error,
    uniform_weights,
)

__version__ = "0.1.0"
