"""aliasmine: find avatar aliases by mining classifier confusion matrices.

Pipeline: behavioural traces -> feature vectors -> stratified cross-validated
classifier -> normalized confusion matrix -> fuzzy pattern concepts ->
scored, cluster-filtered, ranked alias pairs -> tiered evaluation.
"""

from .classify import (
    ClassifierConfig,
    ConfusionMatrix,
    NormalizedConfusionMatrix,
    cross_validate,
    knn_predict,
    naive_bayes_fit_predict,
    normalize,
)
from .dataset import (
    FEATURE_NAMES,
    AvatarIdentity,
    DatasetSpec,
    FeatureVector,
    SurrogateSpec,
    TraceEvent,
    TraceMeta,
    extract_features,
    filter_min_traces,
    inject_surrogates,
)
from .evaluation import (
    GroundTruth,
    MetricsReport,
    average_precision,
    evaluate_ranking,
    label_pair,
    p_at_k,
    precision_recall_f1,
    roc_auc,
)
from .lattice import (
    FuzzyPattern,
    PatternConcept,
    brute_force_concepts,
    enumerate_concepts,
    extent_to_intent,
    intent_to_extent,
    lattice_backend,
    leq,
    meet,
)
from .mining import (
    CandidatePair,
    MiningConfig,
    cluster_score,
    concepts_to_pairs,
    mine,
    score,
)

__version__ = "0.1.0"

__all__ = [
    "AvatarIdentity",
    "CandidatePair",
    "ClassifierConfig",
    "ConfusionMatrix",
    "DatasetSpec",
    "FEATURE_NAMES",
    "FeatureVector",
    "FuzzyPattern",
    "GroundTruth",
    "MetricsReport",
    "MiningConfig",
    "NormalizedConfusionMatrix",
    "PatternConcept",
    "SurrogateSpec",
    "TraceEvent",
    "TraceMeta",
    "average_precision",
    "brute_force_concepts",
    "cluster_score",
    "concepts_to_pairs",
    "cross_validate",
    "enumerate_concepts",
    "evaluate_ranking",
    "extent_to_intent",
    "extract_features",
    "filter_min_traces",
    "inject_surrogates",
    "intent_to_extent",
    "knn_predict",
    "label_pair",
    "lattice_backend",
    "leq",
    "meet",
    "mine",
    "naive_bayes_fit_predict",
    "normalize",
    "p_at_k",
    "precision_recall_f1",
    "roc_auc",
    "score",
]
