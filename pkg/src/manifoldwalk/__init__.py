"""Manifold similarity from random walks on k-NN graphs, and the few-shot
transfer classifier built on it."""

from .datasets import (
    LabeledCloud,
    NoiseSpec,
    PartialCloud,
    add_noise,
    gen_moons,
    gen_s_curve,
    gen_swiss_roll,
    load_csv,
    mask_labels,
    minmax_scale,
    standardize,
    subsample,
)
from .errors import (
    ConvergenceError,
    DataFormatError,
    DimensionMismatch,
    EmptyTrainingSet,
    InstabilityError,
    InvalidArgument,
    ManifoldWalkError,
)
from .graphs import adjacency, knn_graph, max_stable_t, pairwise_euclidean, spectral_radius
from .similarity import (
    SimilarityResult,
    Variant,
    WalkMatrix,
    cloud_distance,
    manifold_distance,
    point_distance,
    view,
    walk_matrix,
)
from .transfer import (
    AccuracyReport,
    TransferConfig,
    TransferOutcome,
    baseline_classify,
    mean_accuracy,
    run_experiment,
    transfer_classify,
)

__version__ = "0.1.0"
