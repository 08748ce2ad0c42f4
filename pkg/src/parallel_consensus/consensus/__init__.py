from parallel_consensus.consensus.params import COUNTING_MODES, ConsensusParams
from parallel_consensus.consensus.sampling import MinimalSet, sample_minimal_set
from parallel_consensus.consensus.scoring import (
    count_inliers,
    model_scores,
    soft_inlier_score,
    unweighted_inlier_count,
    weighted_inlier_count,
)
from parallel_consensus.consensus.selection import (
    HypothesisSet,
    generate_and_select,
    generate_hypotheses,
    log_selection_distribution,
    selection_distribution,
    selection_logits,
)

__all__ = [
    "ConsensusParams",
    "COUNTING_MODES",
    "count_inliers",
    "generate_and_select",
    "generate_hypotheses",
    "HypothesisSet",
    "log_selection_distribution",
    "MinimalSet",
    "model_scores",
    "sample_minimal_set",
    "selection_distribution",
    "selection_logits",
    "soft_inlier_score",
    "unweighted_inlier_count",
    "weighted_inlier_count",
]
