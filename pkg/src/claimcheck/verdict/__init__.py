"""Veracity heads, training harness and evaluation metrics."""

from .features import (
    CLAIM_INFERENCE_FEATURE,
    NEUTRAL_TRIPLET,
    EvidenceGraph,
    PairBundle,
    build_evidence_graph,
    build_graph_from_texts,
    build_pair_bundle,
    claim_node_features,
    evidence_node_features,
)
from .heads import (
    HEAD_KINDS,
    GraphHeadConfig,
    NliGraphAblHead,
    NliGraphHead,
    NliOnlyHead,
    NliPSentHead,
    NliSanHead,
    NliSentHead,
    SanHeadConfig,
    ablation_forward,
    graph_forward,
    graph_parameters,
    make_head,
    san_forward,
    san_parameters,
)
from .metrics import (
    CLASS_NAMES,
    ClassMetrics,
    FoldMetrics,
    MetricsReport,
    ap_at_k,
    classification_metrics,
)
from .train import (
    DEFAULT_TRAIN_CONFIGS,
    TrainConfig,
    TrainResult,
    default_config,
    holdout_split,
    kfold_evaluate,
    stable_fold_assignment,
    train,
)

__all__ = [
    "CLAIM_INFERENCE_FEATURE",
    "CLASS_NAMES",
    "DEFAULT_TRAIN_CONFIGS",
    "ClassMetrics",
    "EvidenceGraph",
    "FoldMetrics",
    "GraphHeadConfig",
    "HEAD_KINDS",
    "MetricsReport",
    "NEUTRAL_TRIPLET",
    "NliGraphAblHead",
    "NliGraphHead",
    "NliOnlyHead",
    "NliPSentHead",
    "NliSanHead",
    "NliSentHead",
    "PairBundle",
    "SanHeadConfig",
    "TrainConfig",
    "TrainResult",
    "ablation_forward",
    "ap_at_k",
    "build_evidence_graph",
    "build_graph_from_texts",
    "build_pair_bundle",
    "claim_node_features",
    "classification_metrics",
    "default_config",
    "evidence_node_features",
    "graph_forward",
    "graph_parameters",
    "holdout_split",
    "kfold_evaluate",
    "make_head",
    "san_forward",
    "san_parameters",
    "stable_fold_assignment",
    "train",
]
