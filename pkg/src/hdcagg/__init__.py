"""Hyperdimensional aggregation of local image descriptors."""

from .core import DimensionMismatch, SymbolTable, bind, bundle, cosine, random_symbol
from .features import FeatureSet
from .position import BasisBank, PoseEncoding, encode_pose, encode_scalar, make_basis_bank
from .preprocess import ProjectionSpec, l2_normalize, mean_center_set, project, standardize_per_image
from .aggregation import (
    Encoder,
    Fingerprint,
    HolisticDescriptor,
    IncompatibleDescriptors,
    OpCounter,
    aggregate_local,
    bundle_holistic,
    compare,
    recover_typed,
    typed_bundle,
)
from .baseline import MatchSet, exhaustive_similarity, exhaustive_similarity_matrix, mutual_matches, position_weight
from .evaluation import (
    EvalReport,
    GroundTruth,
    SimilarityMatrix,
    average_precision,
    evaluate,
    pr_curve,
    recall_at_k,
    similarity_matrix,
)
from .synth import Benchmark, BenchmarkConfig, make_benchmark

__version__ = "0.1.0"
