"""Label-free detector evaluation with the Cumulative Consensus Score."""
from .congruence import (
    CongruenceReport,
    DeltaRecord,
    Dot,
    ImageEvaluation,
    Metric,
    YellowRule,
    classify_dot,
    congruence_report,
    deltas,
    spearman_rho,
)
from .consensus import (
    AugmentedDetections,
    CcsResult,
    ConsensusConfig,
    KappaMode,
    compute_ccs,
    pairwise_consensus,
)
from .geometry import BBox, Detection, iou
from .metrics import GroundTruthObject, GroundTruthSet, MetricConfig, f1_score, oc_cost, ppdq_image, ppdq_pair

__all__ = [
    "AugmentedDetections", "BBox", "CcsResult", "CongruenceReport", "ConsensusConfig",
    "DeltaRecord", "Detection", "Dot", "GroundTruthObject", "GroundTruthSet",
    "ImageEvaluation", "KappaMode", "Metric", "MetricConfig", "YellowRule",
    "classify_dot", "compute_ccs", "congruence_report", "deltas", "f1_score", "iou",
    "oc_cost", "pairwise_consensus", "ppdq_image", "ppdq_pair", "spearman_rho",
]
