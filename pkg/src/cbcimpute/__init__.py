"""Class-based cluster imputation of tabular records."""

from __future__ import annotations

from ._core.clustering import (
    ClassSeededInit,
    ClusterModel,
    FarthestFirstInit,
    FixedInit,
    InitStrategy,
    cluster_means,
    infer_k,
    kmeans,
)
from ._core.dataset import Dataset, EncodedRecord, GroupSplit, split_groups
from ._core.encoding import decode_value, encode, minmax_scale
from ._core.errors import CSVFormatError, PipelineError, RecordImputationError, SchemaError
from ._core.evaluation import (
    GlobalMeanMode,
    GroundTruth,
    MaskSpec,
    Metrics,
    RawKNN,
    evaluate_methods,
    make_synthetic,
    mask_dataset,
    run_baseline,
    score_imputation,
)
from ._core.imputation import (
    ClassMean,
    CopyDonor,
    DonorMatch,
    DonorRank,
    FillStrategy,
    TopK,
    fill_record,
    match_nearest,
    predict_class,
)
from ._core.mapping import (
    MappingConfig,
    MappingEntry,
    Neighbor,
    Type2Mode,
    cross_group_neighbors,
    distance_full,
    distance_masked,
    intra_cluster_neighbors,
    map_complete,
    map_missing,
    type1_sum,
    type2_sum,
)
from ._core.pipeline import ImputationReport, ImputeConfig, classify_dataset, impute_dataset
from ._core.schema import AttributeDescriptor, Schema
from ._core.trace import TraceBundle, build_trace
from ._settings import settings
from ._version import __version__
from ._warnings import (
    ConvergenceWarning,
    MaskShortfallWarning,
    NeighborCountWarning,
    UnlabeledRecordWarning,
)

# Submodules need to be imported last
from . import io  # noqa: E402 isort: skip

# We use these in tests by attribute access
from . import logging  # noqa: F401, E402 isort: skip

__all__ = [
    # Attributes
    "__version__",
    "settings",
    # Submodules
    "io",
    # Classes
    "AttributeDescriptor",
    "Schema",
    "Dataset",
    "EncodedRecord",
    "GroupSplit",
    "ClusterModel",
    "FixedInit",
    "ClassSeededInit",
    "FarthestFirstInit",
    "InitStrategy",
    "MappingConfig",
    "MappingEntry",
    "Neighbor",
    "Type2Mode",
    "DonorRank",
    "DonorMatch",
    "CopyDonor",
    "TopK",
    "ClassMean",
    "FillStrategy",
    "ImputeConfig",
    "ImputationReport",
    "TraceBundle",
    "MaskSpec",
    "GroundTruth",
    "Metrics",
    "GlobalMeanMode",
    "RawKNN",
    # Functions
    "encode",
    "decode_value",
    "minmax_scale",
    "split_groups",
    "infer_k",
    "kmeans",
    "cluster_means",
    "distance_full",
    "distance_masked",
    "type1_sum",
    "type2_sum",
    "intra_cluster_neighbors",
    "cross_group_neighbors",
    "map_complete",
    "map_missing",
    "match_nearest",
    "fill_record",
    "predict_class",
    "impute_dataset",
    "classify_dataset",
    "build_trace",
    "mask_dataset",
    "score_imputation",
    "run_baseline",
    "evaluate_methods",
    "make_synthetic",
    # Errors
    "SchemaError",
    "CSVFormatError",
    "PipelineError",
    "RecordImputationError",
    # Warnings
    "ConvergenceWarning",
    "NeighborCountWarning",
    "MaskShortfallWarning",
    "UnlabeledRecordWarning",
]
